#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stoic/encoding.hpp"
#include "stoic/linear_models.hpp"
#include "stoic/metrics.hpp"

namespace stoic {

struct CvConfig {
  std::size_t outer_folds = 10;
  std::size_t inner_folds = 9;
  std::size_t iterations = 5;
  std::size_t search_trials = 30;
  double search_low = 1e-4;
  double search_high = 1e4;
  std::uint64_t base_seed = 0;
  int max_iterations = 5000;
  double tolerance = 1e-6;
  unsigned jobs = 1;

  void validate() const;
};

struct RunResult {
  std::size_t iteration = 0;
  std::size_t outer_fold = 0;
  Hyperparams chosen;
  MetricsReport test;
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // population
  std::size_t defined = 0;
};

struct AggregateResult {
  MetricSummary auroc, sensitivity, specificity, precision, npv;
  std::size_t runs = 0;
};

/// Outcome of a search: the winner plus the mean inner AUROC of each trial
/// in sampling order.
struct SearchOutcome {
  Hyperparams best;
  std::vector<double> candidates;
  std::vector<double> mean_auroc;  // NaN when every inner fold degenerated
};

/// Log-uniform regularization samples drawn from `seed`.
std::vector<double> sample_regularization(const CvConfig& cfg, std::uint64_t seed);

/// Picks the candidate with the highest mean inner AUROC; ties go to the
/// stronger regularization. Throws OneClassOnly when no candidate scored.
std::size_t select_candidate(ModelKind kind, const std::vector<double>& candidates,
                             const std::vector<double>& mean_auroc);

/// Random search with inner stratified CV over the rows `dev` of a
/// precomputed Gram matrix.
SearchOutcome search_on_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& targets,
                             const std::vector<std::size_t>& dev, ModelKind kind, const CvConfig& cfg,
                             std::uint64_t seed);

Hyperparams hyperparam_search(const FeatureMatrix& dev, ModelKind kind, const CvConfig& cfg, std::uint64_t seed);

/// Fits on `train` rows of the Gram matrix and returns decision scores of `eval` rows.
Eigen::VectorXd fit_and_score(const Eigen::MatrixXd& gram, const Eigen::VectorXd& targets,
                              const std::vector<std::size_t>& train, const std::vector<std::size_t>& eval,
                              ModelKind kind, const Hyperparams& hp);

/// Seeds used by one (iteration, outer fold) run. nested_cv and the ablation
/// share them so masked and unmasked runs see the same splits and searches.
std::uint64_t iteration_seed(const CvConfig& cfg, std::size_t iteration);
std::uint64_t search_seed(const CvConfig& cfg, std::size_t iteration, std::size_t fold);

/// One outer fold: search on dev, refit on all of dev, score test.
RunResult evaluate_outer_fold(const Eigen::MatrixXd& gram, const Eigen::VectorXd& targets,
                              const std::vector<std::size_t>& dev, const std::vector<std::size_t>& test,
                              ModelKind kind, const CvConfig& cfg, std::size_t iteration, std::size_t fold);

std::vector<RunResult> nested_cv(const FeatureMatrix& x, ModelKind kind, const CvConfig& cfg);
std::vector<RunResult> nested_cv(const StoichiometryDataset& dataset, const EncodingMap& map, EncodingMethod method,
                                 ModelKind kind, const CvConfig& cfg);

AggregateResult aggregate(const std::vector<RunResult>& results);
MetricSummary summarize(const std::vector<double>& values);

struct ExperimentTag {
  std::string encoding;
  std::string map;
  std::string model;
};

std::string runs_csv_header();
std::string runs_csv_rows(const ExperimentTag& tag, const std::vector<RunResult>& results, std::size_t outer_folds);
std::string summary_csv_header();
std::string summary_csv_row(const ExperimentTag& tag, const AggregateResult& agg);

}  // namespace stoic
