#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "stoic/encoding.hpp"

namespace stoic {

enum class ModelKind { Ridge, Logistic, LinearSvm };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

/// `regularization` is alpha for Ridge and C for Logistic/LinearSvm.
struct Hyperparams {
  double regularization = 1.0;
  int max_iterations = 5000;
  double tolerance = 1e-6;

  void validate() const;
  bool operator==(const Hyperparams&) const = default;
};

/// True when a larger regularization value shrinks the weights harder
/// (alpha) rather than relaxing them (C).
inline bool larger_is_stronger(ModelKind kind) { return kind == ModelKind::Ridge; }

struct LinearModel {
  ModelKind kind = ModelKind::Ridge;
  Eigen::VectorXd weights;
  double intercept = 0.0;
  FeatureLayout layout;
  Hyperparams hyperparams;
  bool converged = true;
  int iterations = 0;
};

struct PositionalScore {
  std::vector<double> scores;
  std::string source;
};

/// Cholesky solve of a symmetric positive-definite system. Throws
/// NotPositiveDefinite when a pivot is not strictly positive.
Eigen::VectorXd solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs);

/// x_i . x_j for every pair of rows. Each entry is an independent dot
/// product, so a sub-block equals the Gram matrix of the corresponding rows.
Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& x);

/// Training rows expressed in an orthonormal basis of their centered span.
/// Every L2-penalized linear fit with an unpenalized intercept has its
/// weights in that span, so fitting on `z()` (n x r, r <= n) is exact and the
/// cost no longer depends on the feature count.
class ReducedDesign {
 public:
  /// Built from the Gram matrix of the training rows.
  static ReducedDesign from_gram(const Eigen::MatrixXd& gram);
  /// Uses the centered features directly (cheaper when features <= rows).
  static ReducedDesign from_features(const Eigen::MatrixXd& x);

  const Eigen::MatrixXd& z() const { return z_; }
  Eigen::Index rank() const { return z_.cols(); }

  /// Coordinates of new rows. `cross` is the Gram block (new rows x training
  /// rows) for a Gram design, or the raw feature rows for a feature design.
  Eigen::MatrixXd project(const Eigen::MatrixXd& cross) const;

  /// Weights over the original features: w = Xc^T beta, recovered from the
  /// training feature rows. `x_train` must be the rows the design was built on.
  Eigen::VectorXd weights(const Eigen::VectorXd& u, const Eigen::MatrixXd& x_train) const;
  /// Column means of the training rows, needed to turn the centered offset
  /// into a raw intercept.
  Eigen::RowVectorXd column_means(const Eigen::MatrixXd& x_train) const { return x_train.colwise().mean(); }

 private:
  bool from_gram_ = false;
  Eigen::MatrixXd z_;
  // Gram route
  Eigen::MatrixXd basis_;  // U * Lambda^{-1/2}, n x r
  Eigen::VectorXd gram_row_means_;
  double gram_mean_ = 0.0;
  // Feature route
  Eigen::RowVectorXd feature_means_;
};

/// Solution in reduced coordinates: scores are z * u + offset.
struct ReducedFit {
  Eigen::VectorXd u;
  double offset = 0.0;
  bool converged = true;
  int iterations = 0;
  std::vector<double> objective_trace;
};

/// `start`, when given, seeds the iterative solvers (ignored for ridge).
ReducedFit solve_reduced(ModelKind kind, const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const Hyperparams& hp,
                         const ReducedFit* start = nullptr);

/// Training objective of a model kind at (w, b) on raw features.
double objective(ModelKind kind, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                 double b, double regularization);
/// Gradient of `objective`; the last entry is the intercept derivative.
Eigen::VectorXd objective_gradient(ModelKind kind, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& w, double b, double regularization);

LinearModel fit(ModelKind kind, const FeatureMatrix& x, const Hyperparams& hp);
inline LinearModel fit_ridge(const FeatureMatrix& x, const Hyperparams& hp) { return fit(ModelKind::Ridge, x, hp); }
inline LinearModel fit_logistic(const FeatureMatrix& x, const Hyperparams& hp) {
  return fit(ModelKind::Logistic, x, hp);
}
inline LinearModel fit_linear_svm(const FeatureMatrix& x, const Hyperparams& hp) {
  return fit(ModelKind::LinearSvm, x, hp);
}

Eigen::VectorXd decision_scores(const LinearModel& model, const FeatureMatrix& x);
/// Score > 0 predicts OneEighty; ties at 0 predict Sixty.
StoichiometryClass predict_one(double score);
std::vector<StoichiometryClass> predict(const LinearModel& model, const FeatureMatrix& x);

/// Sum of absolute weights over the channels of each position.
PositionalScore positional_weights(const LinearModel& model);

std::string model_to_json(const LinearModel& model);
LinearModel model_from_json(const std::string& text);
/// position,category,weight rows, one per feature.
std::string weights_csv(const LinearModel& model);
std::string positional_csv(const PositionalScore& score);

}  // namespace stoic
