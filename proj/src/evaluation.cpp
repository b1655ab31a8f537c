#include "stoic/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <numeric>
#include <algorithm>

#include "stoic/parallel.hpp"
#include "stoic/rng.hpp"

namespace stoic {

void CvConfig::validate() const {
  if (outer_folds < 2) throw Error(ErrorCode::BadConfig, "outer_folds must be >= 2");
  if (inner_folds < 2) throw Error(ErrorCode::BadConfig, "inner_folds must be >= 2");
  if (iterations < 1) throw Error(ErrorCode::BadConfig, "iterations must be >= 1");
  if (search_trials < 1) throw Error(ErrorCode::BadConfig, "search_trials must be >= 1");
  if (!(search_low > 0.0) || !(search_high >= search_low))
    throw Error(ErrorCode::BadConfig, "search range must satisfy 0 < low <= high");
  Hyperparams{1.0, max_iterations, tolerance}.validate();
}

std::vector<double> sample_regularization(const CvConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  const double lo = std::log(cfg.search_low);
  const double hi = std::log(cfg.search_high);
  std::vector<double> out(cfg.search_trials);
  for (auto& v : out) v = std::exp(lo + (hi - lo) * rng.uniform01());
  return out;
}

std::size_t select_candidate(ModelKind kind, const std::vector<double>& candidates,
                             const std::vector<double>& mean_auroc) {
  std::size_t best = candidates.size();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (std::isnan(mean_auroc[i])) continue;
    if (best == candidates.size() || mean_auroc[i] > mean_auroc[best]) {
      best = i;
    } else if (mean_auroc[i] == mean_auroc[best]) {
      const bool stronger = larger_is_stronger(kind) ? candidates[i] > candidates[best]
                                                     : candidates[i] < candidates[best];
      if (stronger) best = i;
    }
  }
  if (best == candidates.size()) throw Error(ErrorCode::OneClassOnly, "no inner fold produced an AUROC");
  return best;
}

namespace {

std::vector<std::size_t> pick(const std::vector<std::size_t>& from, const std::vector<std::size_t>& positions) {
  std::vector<std::size_t> out;
  out.reserve(positions.size());
  for (auto p : positions) out.push_back(from[p]);
  return out;
}

bool both_classes(const Eigen::VectorXd& targets, const std::vector<std::size_t>& rows) {
  bool pos = false, neg = false;
  for (auto r : rows) (targets[static_cast<Eigen::Index>(r)] > 0 ? pos : neg) = true;
  return pos && neg;
}

Hyperparams make_hp(const CvConfig& cfg, double reg) { return Hyperparams{reg, cfg.max_iterations, cfg.tolerance}; }

}  // namespace

SearchOutcome search_on_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& targets,
                             const std::vector<std::size_t>& dev, ModelKind kind, const CvConfig& cfg,
                             std::uint64_t seed) {
  SearchOutcome out;
  out.candidates = sample_regularization(cfg, seed);
  out.mean_auroc.assign(out.candidates.size(), std::numeric_limits<double>::quiet_NaN());
  if (!both_classes(targets, dev)) throw Error(ErrorCode::OneClassOnly, "development rows hold a single class");
  if (out.candidates.size() == 1) {
    out.best = make_hp(cfg, out.candidates.front());
    return out;
  }

  std::vector<StoichiometryClass> dev_labels;
  std::size_t per_class[2] = {0, 0};
  for (auto r : dev) {
    const bool pos = targets[static_cast<Eigen::Index>(r)] > 0;
    dev_labels.push_back(pos ? StoichiometryClass::OneEighty : StoichiometryClass::Sixty);
    ++per_class[pos ? 1 : 0];
  }
  // Small development sets get as many inner folds as the rarer class allows.
  const std::size_t inner = std::min(cfg.inner_folds, std::min(per_class[0], per_class[1]));
  if (inner < 2) {
    std::clog << "stoic: too few development rows for inner folds; using the first sampled value\n";
    out.best = make_hp(cfg, out.candidates.front());
    return out;
  }
  const FoldAssignment folds = stratified_folds(dev_labels, inner, derive_seed(seed, 1));

  // Trials run from strongest to weakest regularization, each warm-started
  // from the previous solution.
  std::vector<std::size_t> order(out.candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return larger_is_stronger(kind) ? out.candidates[a] > out.candidates[b] : out.candidates[a] < out.candidates[b];
  });
  std::vector<double> sum(out.candidates.size(), 0.0);
  std::vector<std::size_t> scored(out.candidates.size(), 0);
  for (std::size_t f = 0; f < inner; ++f) {
    const auto train = pick(dev, folds.complement(f));
    const auto val = pick(dev, folds.members(f));
    if (!both_classes(targets, val) || !both_classes(targets, train)) {
      std::clog << "stoic: inner fold " << f << " holds a single class; skipped\n";
      continue;
    }
    const ReducedDesign design = ReducedDesign::from_gram(gram(train, train));
    const Eigen::MatrixXd z_val = design.project(gram(val, train));
    const Eigen::VectorXd y_train = targets(train);
    const Eigen::VectorXd y_val = targets(val);
    ReducedFit previous;
    for (std::size_t c : order) {
      const ReducedFit rf = solve_reduced(kind, design.z(), y_train, make_hp(cfg, out.candidates[c]), &previous);
      const Eigen::VectorXd s = (z_val * rf.u).array() + rf.offset;
      sum[c] += auroc(s, y_val);
      ++scored[c];
      previous = rf;
    }
  }
  for (std::size_t c = 0; c < out.candidates.size(); ++c)
    if (scored[c] > 0) out.mean_auroc[c] = sum[c] / static_cast<double>(scored[c]);
  out.best = make_hp(cfg, out.candidates[select_candidate(kind, out.candidates, out.mean_auroc)]);
  return out;
}

Hyperparams hyperparam_search(const FeatureMatrix& dev, ModelKind kind, const CvConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::vector<std::size_t> rows(dev.rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return search_on_gram(gram_matrix(dev.values), dev.targets, rows, kind, cfg, seed).best;
}

Eigen::VectorXd fit_and_score(const Eigen::MatrixXd& gram, const Eigen::VectorXd& targets,
                              const std::vector<std::size_t>& train, const std::vector<std::size_t>& eval,
                              ModelKind kind, const Hyperparams& hp) {
  const ReducedDesign design = ReducedDesign::from_gram(gram(train, train));
  const ReducedFit rf = solve_reduced(kind, design.z(), targets(train), hp);
  return (design.project(gram(eval, train)) * rf.u).array() + rf.offset;
}

std::uint64_t iteration_seed(const CvConfig& cfg, std::size_t iteration) { return cfg.base_seed + iteration; }

std::uint64_t search_seed(const CvConfig& cfg, std::size_t iteration, std::size_t fold) {
  return derive_seed(iteration_seed(cfg, iteration), fold + 1);
}

RunResult evaluate_outer_fold(const Eigen::MatrixXd& gram, const Eigen::VectorXd& targets,
                              const std::vector<std::size_t>& dev, const std::vector<std::size_t>& test,
                              ModelKind kind, const CvConfig& cfg, std::size_t iteration, std::size_t fold) {
  RunResult r;
  r.iteration = iteration;
  r.outer_fold = fold;
  r.chosen = search_on_gram(gram, targets, dev, kind, cfg, search_seed(cfg, iteration, fold)).best;
  r.test = report(fit_and_score(gram, targets, dev, test, kind, r.chosen), targets(test));
  return r;
}

std::vector<RunResult> nested_cv(const FeatureMatrix& x, ModelKind kind, const CvConfig& cfg) {
  cfg.validate();
  const auto labels = x.labels();
  std::vector<FoldAssignment> outer;
  for (std::size_t it = 0; it < cfg.iterations; ++it)
    outer.push_back(stratified_folds(labels, cfg.outer_folds, iteration_seed(cfg, it)));

  const Eigen::MatrixXd gram = gram_matrix(x.values);
  std::vector<RunResult> results(cfg.iterations * cfg.outer_folds);
  parallel_for(results.size(), cfg.jobs, [&](std::size_t task) {
    const std::size_t it = task / cfg.outer_folds;
    const std::size_t fold = task % cfg.outer_folds;
    results[task] = evaluate_outer_fold(gram, x.targets, outer[it].complement(fold), outer[it].members(fold), kind,
                                        cfg, it, fold);
  });
  return results;
}

std::vector<RunResult> nested_cv(const StoichiometryDataset& dataset, const EncodingMap& map, EncodingMethod method,
                                 ModelKind kind, const CvConfig& cfg) {
  return nested_cv(encode(dataset, map, method), kind, cfg);
}

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  s.defined = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(values.size()));
  return s;
}

AggregateResult aggregate(const std::vector<RunResult>& results) {
  if (results.empty()) throw Error(ErrorCode::Empty, "no run results to aggregate");
  auto collect = [&](auto member) {
    std::vector<double> vals;
    for (const auto& r : results)
      if (const auto& v = r.test.*member) vals.push_back(*v);
    return summarize(vals);
  };
  AggregateResult agg;
  agg.runs = results.size();
  agg.auroc = collect(&MetricsReport::auroc);
  agg.sensitivity = collect(&MetricsReport::sensitivity);
  agg.specificity = collect(&MetricsReport::specificity);
  agg.precision = collect(&MetricsReport::precision);
  agg.npv = collect(&MetricsReport::npv);
  return agg;
}

std::string runs_csv_header() {
  return "run_id,fold,encoding,map,model,auroc,sensitivity,specificity,precision,npv,regularization\n";
}

std::string runs_csv_rows(const ExperimentTag& tag, const std::vector<RunResult>& results, std::size_t outer_folds) {
  std::string out;
  char reg[32];
  for (const auto& r : results) {
    std::snprintf(reg, sizeof reg, "%.17g", r.chosen.regularization);
    out += std::to_string(r.iteration * outer_folds + r.outer_fold) + "," + std::to_string(r.outer_fold) + "," +
           tag.encoding + "," + tag.map + "," + tag.model + "," + format_metric(r.test.auroc) + "," +
           format_metric(r.test.sensitivity) + "," + format_metric(r.test.specificity) + "," +
           format_metric(r.test.precision) + "," + format_metric(r.test.npv) + "," + reg + "\n";
  }
  return out;
}

std::string summary_csv_header() {
  return "encoding,map,model,n_runs,auroc_mean,auroc_std,sensitivity_mean,sensitivity_std,specificity_mean,"
         "specificity_std,precision_mean,precision_std,npv_mean,npv_std\n";
}

std::string summary_csv_row(const ExperimentTag& tag, const AggregateResult& agg) {
  std::string out = tag.encoding + "," + tag.map + "," + tag.model + "," + std::to_string(agg.runs);
  char buf[64];
  for (const MetricSummary* m : {&agg.auroc, &agg.sensitivity, &agg.specificity, &agg.precision, &agg.npv}) {
    if (m->defined == 0) {
      out += ",NA,NA";
      continue;
    }
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f", m->mean, m->std);
    out += buf;
  }
  return out + "\n";
}

}  // namespace stoic
