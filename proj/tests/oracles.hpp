#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "stoic/influence.hpp"
#include "stoic/linear_models.hpp"

// Reference implementations shared by the unit tests and the acceptance run.
namespace testing {

using stoic::ModelKind;

// O(n^2) pairwise definition with half credit for ties.
inline double pairwise_auroc(const Eigen::VectorXd& s, const Eigen::VectorXd& y) {
  double wins = 0;
  long pairs = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (y[i] <= 0) continue;
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      if (y[j] > 0) continue;
      ++pairs;
      if (s[i] > s[j]) wins += 1.0;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// Textbook objectives written out independently of the library.
inline double loss_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w, double b, double a) {
  double s = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double r = x.row(i).dot(w) + b - y[i];
    s += r * r;
  }
  return s + a * w.squaredNorm();
}

inline double loss_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w, double b,
                     double c) {
  double s = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) s += std::log1p(std::exp(-y[i] * (x.row(i).dot(w) + b)));
  return s + w.squaredNorm() / (2 * c);
}

inline double loss_svm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w, double b, double c) {
  double s = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double h = std::max(0.0, 1.0 - y[i] * (x.row(i).dot(w) + b));
    s += h * h;
  }
  return 0.5 * w.squaredNorm() + c * s;
}

inline double loss(ModelKind kind, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w, double b,
            double reg) {
  switch (kind) {
    case ModelKind::Ridge: return loss_ridge(x, y, w, b, reg);
    case ModelKind::Logistic: return loss_logistic(x, y, w, b, reg);
    case ModelKind::LinearSvm: return loss_svm(x, y, w, b, reg);
  }
  return 0;
}

// Central differences over (w, b).
inline Eigen::VectorXd numeric_gradient(ModelKind kind, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& w, double b, double reg) {
  const Eigen::Index d = w.size();
  Eigen::VectorXd g(d + 1);
  for (Eigen::Index j = 0; j <= d; ++j) {
    Eigen::VectorXd wp = w, wm = w;
    double bp = b, bm = b;
    const double h = 1e-6 * std::max(1.0, j < d ? std::abs(w[j]) : std::abs(b));
    if (j < d) {
      wp[j] += h;
      wm[j] -= h;
    } else {
      bp += h;
      bm -= h;
    }
    g[j] = (loss(kind, x, y, wp, bp, reg) - loss(kind, x, y, wm, bm, reg)) / (2 * h);
  }
  return g;
}

// Plain gradient descent on the ridge objective.
inline std::pair<Eigen::VectorXd, double> ridge_by_descent(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double a) {
  const Eigen::Index n = x.rows(), d = x.cols();
  Eigen::MatrixXd aug(n, d + 1);
  aug << x, Eigen::VectorXd::Ones(n);
  Eigen::MatrixXd h = 2.0 * aug.transpose() * aug;
  h.topLeftCorner(d, d).diagonal().array() += 2.0 * a;
  const double lipschitz = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues().maxCoeff();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);
  for (int it = 0; it < 2000000; ++it) {
    Eigen::VectorXd r = aug * theta - y;
    Eigen::VectorXd g = 2.0 * aug.transpose() * r;
    g.head(d) += 2.0 * a * theta.head(d);
    if (g.norm() < 1e-11) break;
    theta -= g / lipschitz;
  }
  return {theta.head(d), theta[d]};
}

inline double brute_sq_dist(const Eigen::MatrixXd& x, Eigen::Index i, Eigen::Index j) {
  double s = 0;
  for (Eigen::Index c = 0; c < x.cols(); ++c) s += (x(i, c) - x(j, c)) * (x(i, c) - x(j, c));
  return s;
}

// Dense reference: explicit S, D, L and the Rayleigh quotient per column.
inline Eigen::VectorXd dense_laplacian(const Eigen::MatrixXd& x, std::size_t k, double t) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd dist(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) dist(i, j) = brute_sq_dist(x, i, j);
  if (t <= 0) {
    double sum = 0;
    int pairs = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j, ++pairs) sum += dist(i, j);
    t = sum / pairs;
  }
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<Eigen::Index> others;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) others.push_back(j);
    std::sort(others.begin(), others.end(), [&](auto a, auto b) {
      return dist(i, a) != dist(i, b) ? dist(i, a) < dist(i, b) : a < b;
    });
    for (std::size_t q = 0; q < k; ++q) {
      const auto j = others[q];
      s(i, j) = s(j, i) = std::exp(-dist(i, j) / t);
    }
  }
  const Eigen::VectorXd deg = s.rowwise().sum();
  const Eigen::MatrixXd dm = deg.asDiagonal();
  const Eigen::MatrixXd lap = dm - s;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd out(x.cols());
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    const Eigen::VectorXd col = x.col(f);
    if (col.maxCoeff() == col.minCoeff()) {
      out[f] = stoic::kLaplacianSentinel;
      continue;
    }
    const double shift = col.dot(dm * ones) / ones.dot(dm * ones);
    const Eigen::VectorXd ft = col - shift * ones;
    out[f] = ft.dot(lap * ft) / ft.dot(dm * ft);
  }
  return out;
}

}  // namespace testing
