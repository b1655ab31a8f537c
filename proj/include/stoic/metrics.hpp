#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "stoic/dataset.hpp"

namespace stoic {

/// OneEighty is the positive class.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

/// A metric is std::nullopt when its denominator is zero (or, for AUROC,
/// when only one class is present).
struct MetricsReport {
  std::optional<double> auroc;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> precision;
  std::optional<double> npv;
  ConfusionCounts counts;
};

/// Mann-Whitney AUROC via average ranks; ties get half credit.
/// Labels are +-1 targets. Throws OneClassOnly.
double auroc(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels);

ConfusionCounts confusion(const std::vector<StoichiometryClass>& predicted,
                          const std::vector<StoichiometryClass>& actual);

/// Confusion metrics use the score > 0 rule. AUROC is left undefined rather
/// than thrown when a class is missing.
MetricsReport report(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels);
MetricsReport report_from_counts(const ConfusionCounts& counts);

/// "NA" for an undefined value, otherwise fixed 6 decimals.
std::string format_metric(const std::optional<double>& v);

}  // namespace stoic
