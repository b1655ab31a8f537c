#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

#include "stoic/evaluation.hpp"

namespace stoic {

enum class SelectionMethod { TruncationPrefix, WeightRanking, VarianceRanking, LaplacianScore };

std::string to_string(SelectionMethod method);
/// Accepts prefix|weights|variance|laplacian.
SelectionMethod selection_method_from_string(const std::string& s);

enum class Direction { HigherBetter, LowerBetter };

/// Score given to constant feature columns by laplacian_scores.
inline constexpr double kLaplacianSentinel = std::numeric_limits<double>::infinity();

struct NeighborGraph {
  Eigen::MatrixXd similarity;  // S, symmetric, zero diagonal
  Eigen::VectorXd degree;      // row sums of S
  std::size_t k = 0;
  double t = 0.0;

  Eigen::MatrixXd laplacian() const;
};

/// Squared Euclidean distances between rows, from the Gram matrix.
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& gram);

/// Mean squared distance over all unordered pairs; 1 when every row coincides.
double default_kernel_width(const Eigen::MatrixXd& sq_dist);

/// Heat-kernel kNN graph with union symmetrization. t <= 0 selects
/// default_kernel_width. Neighbour ties resolve to the lower row index.
NeighborGraph build_knn_graph(const Eigen::MatrixXd& x, std::size_t k, double t = 0.0);

/// Laplacian score per feature column; lower is more informative.
Eigen::VectorXd laplacian_scores(const Eigen::MatrixXd& x, const NeighborGraph& graph);
Eigen::VectorXd laplacian_scores(const Eigen::MatrixXd& x, std::size_t k, double t = 0.0);

/// Population variance per feature column.
Eigen::VectorXd variance_scores(const Eigen::MatrixXd& x);

/// Collapses per-feature scores to per-position scores: sum over channels
/// for HigherBetter, mean over finite channels for LowerBetter.
PositionalScore positional_aggregate(const Eigen::VectorXd& feature_scores, const FeatureLayout& layout,
                                     Direction direction);

std::size_t selection_count(std::size_t positions, double percent);

/// Ascending positions. `prefix` ignores the scores and returns [0, count).
std::vector<std::size_t> select_positions(const std::vector<double>& scores, double percent, Direction direction);
std::vector<std::size_t> select_prefix(std::size_t positions, double percent);

/// Copies the selected position blocks and zeroes every other column.
FeatureMatrix mask_matrix(const FeatureMatrix& x, const std::vector<std::size_t>& positions);

/// Feature columns belonging to the selected position blocks, ascending.
std::vector<Eigen::Index> block_columns(const FeatureLayout& layout, const std::vector<std::size_t>& positions);

struct AblationPoint {
  double percent = 0.0;
  MetricSummary auroc;
  std::size_t runs = 0;
};

struct AblationResult {
  SelectionMethod method = SelectionMethod::TruncationPrefix;
  std::vector<AblationPoint> points;  // ascending percent
  double best_percent = 0.0;
  double best_mean_auroc = 0.0;
  /// Positions picked on the full dataset at best_percent (for export only;
  /// evaluation always ranks on development rows).
  std::vector<std::size_t> best_positions;
};

struct AblationOptions {
  std::size_t knn = 5;
  double kernel_width = 0.0;  // <= 0: mean squared pairwise distance
};

/// Per-fold ranking on development rows, then mask, search, refit and score
/// each grid percentage with the same seeds nested_cv uses.
AblationResult ablation_run(const FeatureMatrix& x, ModelKind kind, SelectionMethod method,
                            std::vector<double> grid, const CvConfig& cfg, const AblationOptions& opts = {});

/// Positional ranking for one method computed on the given rows only.
/// Returns the scores with their direction; prefix returns empty scores.
struct PositionRanking {
  std::vector<double> scores;
  Direction direction = Direction::HigherBetter;
};
PositionRanking rank_positions(const FeatureMatrix& x, const std::vector<std::size_t>& rows, ModelKind kind,
                               SelectionMethod method, const CvConfig& cfg, std::uint64_t seed,
                               const AblationOptions& opts);

std::vector<std::size_t> select_for_method(SelectionMethod method, const PositionRanking& ranking,
                                           std::size_t positions, double percent);

/// Parses "start:stop:step" (inclusive) or a comma list.
std::vector<double> parse_grid(const std::string& spec);

std::string ablation_csv_header();
std::string ablation_csv_rows(const AblationResult& result);
std::string positions_json(const std::vector<AblationResult>& results);

}  // namespace stoic
