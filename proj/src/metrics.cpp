#include "stoic/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "stoic/linear_models.hpp"

namespace stoic {

double auroc(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::LengthMismatch, "scores and labels differ in length");
  const auto n = static_cast<std::size_t>(scores.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[static_cast<Eigen::Index>(a)] < scores[static_cast<Eigen::Index>(b)];
  });

  // Sum of (1-based, tie-averaged) ranks of the positives, kept doubled so
  // it stays an exact integer.
  long long doubled_rank_sum = 0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    const double v = scores[static_cast<Eigen::Index>(order[i])];
    while (j < n && scores[static_cast<Eigen::Index>(order[j])] == v) ++j;
    const auto doubled_avg = static_cast<long long>(i + 1 + j);  // 2 * mean of ranks i+1..j
    for (std::size_t t = i; t < j; ++t) {
      if (labels[static_cast<Eigen::Index>(order[t])] > 0) {
        doubled_rank_sum += doubled_avg;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) throw Error(ErrorCode::OneClassOnly, "AUROC needs both classes");
  const auto p = static_cast<long long>(positives);
  const long long doubled_u = doubled_rank_sum - p * (p + 1);
  return static_cast<double>(doubled_u) / (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

ConfusionCounts confusion(const std::vector<StoichiometryClass>& predicted,
                          const std::vector<StoichiometryClass>& actual) {
  if (predicted.size() != actual.size()) throw Error(ErrorCode::LengthMismatch, "prediction/label count mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool pred_pos = predicted[i] == StoichiometryClass::OneEighty;
    const bool act_pos = actual[i] == StoichiometryClass::OneEighty;
    if (pred_pos && act_pos) ++c.tp;
    else if (pred_pos) ++c.fp;
    else if (act_pos) ++c.fn;
    else ++c.tn;
  }
  return c;
}

namespace {
std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

MetricsReport report_from_counts(const ConfusionCounts& c) {
  MetricsReport r;
  r.counts = c;
  r.sensitivity = ratio(c.tp, c.tp + c.fn);
  r.specificity = ratio(c.tn, c.tn + c.fp);
  r.precision = ratio(c.tp, c.tp + c.fp);
  r.npv = ratio(c.tn, c.tn + c.fn);
  return r;
}

MetricsReport report(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::LengthMismatch, "scores and labels differ in length");
  std::vector<StoichiometryClass> predicted, actual;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    predicted.push_back(predict_one(scores[i]));
    actual.push_back(labels[i] > 0 ? StoichiometryClass::OneEighty : StoichiometryClass::Sixty);
  }
  MetricsReport r = report_from_counts(confusion(predicted, actual));
  try {
    r.auroc = auroc(scores, labels);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::OneClassOnly) throw;
  }
  return r;
}

std::string format_metric(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

}  // namespace stoic
