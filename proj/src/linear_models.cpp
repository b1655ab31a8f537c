#include "stoic/linear_models.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <limits>
#include <json.hpp>

namespace stoic {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Ridge: return "ridge";
    case ModelKind::Logistic: return "logistic";
    case ModelKind::LinearSvm: return "svm";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "ridge") return ModelKind::Ridge;
  if (s == "logistic") return ModelKind::Logistic;
  if (s == "svm") return ModelKind::LinearSvm;
  throw Error(ErrorCode::BadConfig, "unknown model '" + s + "' (expected ridge|logistic|svm)");
}

void Hyperparams::validate() const {
  if (!(regularization > 0.0) || !std::isfinite(regularization))
    throw Error(ErrorCode::BadConfig, "regularization must be positive and finite");
  if (max_iterations <= 0) throw Error(ErrorCode::BadConfig, "max_iterations must be positive");
  if (!(tolerance > 0.0)) throw Error(ErrorCode::BadConfig, "tolerance must be positive");
}

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || rhs.size() != n) throw Error(ErrorCode::LengthMismatch, "solve_spd: shape mismatch");
  // Upper factor stored by columns, a = r^T r, so every inner product is contiguous.
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i)
      r(i, j) = (a(i, j) - r.col(i).head(i).dot(r.col(j).head(i))) / r(i, i);
    const double pivot = a(j, j) - r.col(j).head(j).squaredNorm();
    if (!(pivot > 0.0))
      throw Error(ErrorCode::NotPositiveDefinite, "pivot " + std::to_string(j) + " is " + std::to_string(pivot));
    r(j, j) = std::sqrt(pivot);
  }
  Eigen::VectorXd x = rhs;
  for (Eigen::Index i = 0; i < n; ++i) x[i] = (x[i] - r.col(i).head(i).dot(x.head(i))) / r(i, i);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    x[i] /= r(i, i);
    x.head(i) -= x[i] * r.col(i).head(i);
  }
  return x;
}

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& x) {
  // Columns of the transpose are contiguous rows of x.
  const Eigen::MatrixXd xt = x.transpose();
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = xt.col(i).dot(xt.col(j));
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

ReducedDesign ReducedDesign::from_gram(const Eigen::MatrixXd& gram) {
  ReducedDesign d;
  d.from_gram_ = true;
  const Eigen::Index n = gram.rows();
  d.gram_row_means_ = gram.rowwise().mean();
  d.gram_mean_ = n > 0 ? d.gram_row_means_.mean() : 0.0;
  Eigen::MatrixXd centered = gram;
  centered.colwise() -= d.gram_row_means_;
  centered.rowwise() -= d.gram_row_means_.transpose();
  centered.array() += d.gram_mean_;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(centered);
  const Eigen::VectorXd& lambda = eig.eigenvalues();  // ascending
  const double top = n > 0 ? lambda[n - 1] : 0.0;
  const double floor = top * 1e-11;
  Eigen::Index first = 0;
  while (first < n && !(lambda[first] > floor && lambda[first] > 0.0)) ++first;
  const Eigen::Index r = n - first;
  const Eigen::MatrixXd u = eig.eigenvectors().rightCols(r);
  const Eigen::ArrayXd sqrt_l = lambda.tail(r).array().sqrt();
  d.z_ = u * sqrt_l.matrix().asDiagonal();
  d.basis_ = u * sqrt_l.inverse().matrix().asDiagonal();
  return d;
}

ReducedDesign ReducedDesign::from_features(const Eigen::MatrixXd& x) {
  ReducedDesign d;
  d.from_gram_ = false;
  d.feature_means_ = x.colwise().mean();
  d.z_ = x.rowwise() - d.feature_means_;
  return d;
}

Eigen::MatrixXd ReducedDesign::project(const Eigen::MatrixXd& cross) const {
  if (!from_gram_) return cross.rowwise() - feature_means_;
  if (cross.cols() != gram_row_means_.size())
    throw Error(ErrorCode::LayoutMismatch, "cross-Gram width does not match training rows");
  Eigen::MatrixXd kc = cross;
  const Eigen::VectorXd new_means = cross.rowwise().mean();
  kc.colwise() -= new_means;
  kc.rowwise() -= gram_row_means_.transpose();
  kc.array() += gram_mean_;
  return kc * basis_;
}

Eigen::VectorXd ReducedDesign::weights(const Eigen::VectorXd& u, const Eigen::MatrixXd& x_train) const {
  if (!from_gram_) return u;
  const Eigen::VectorXd beta = basis_ * u;
  const Eigen::RowVectorXd means = x_train.colwise().mean();
  return x_train.transpose() * beta - means.transpose() * beta.sum();
}

namespace {

double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }
double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

struct Smooth {
  ModelKind kind;
  const Eigen::MatrixXd& z;
  const Eigen::VectorXd& y;
  double c;

  Eigen::VectorXd scores(const Eigen::VectorXd& theta) const {
    const Eigen::Index r = z.cols();
    return (z * theta.head(r)).array() + theta[r];
  }

  double value(const Eigen::VectorXd& theta) const {
    const Eigen::Index r = z.cols();
    const Eigen::VectorXd s = scores(theta);
    const double wn = theta.head(r).squaredNorm();
    double loss = 0.0;
    if (kind == ModelKind::Logistic) {
      for (Eigen::Index i = 0; i < s.size(); ++i) loss += softplus(-y[i] * s[i]);
      return loss + wn / (2.0 * c);
    }
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const double h = std::max(0.0, 1.0 - y[i] * s[i]);
      loss += h * h;
    }
    return 0.5 * wn + c * loss;
  }

  // Gradient and (generalized) Hessian in one pass.
  void derivatives(const Eigen::VectorXd& theta, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
    const Eigen::Index r = z.cols();
    const Eigen::Index n = z.rows();
    const Eigen::VectorXd s = scores(theta);
    Eigen::VectorXd g(n);    // d loss / d s_i
    Eigen::VectorXd cur(n);  // d^2 loss / d s_i^2
    double penalty_grad_scale;
    double penalty_hess;
    if (kind == ModelKind::Logistic) {
      for (Eigen::Index i = 0; i < n; ++i) {
        g[i] = -y[i] * sigmoid(-y[i] * s[i]);
        const double p = sigmoid(s[i]);
        cur[i] = p * (1.0 - p);
      }
      penalty_grad_scale = 1.0 / c;
      penalty_hess = 1.0 / c;
    } else {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double h = 1.0 - y[i] * s[i];
        g[i] = h > 0 ? -2.0 * c * y[i] * h : 0.0;
        cur[i] = h > 0 ? 2.0 * c : 0.0;
      }
      penalty_grad_scale = 1.0;
      penalty_hess = 1.0;
    }
    grad.resize(r + 1);
    grad.head(r) = z.transpose() * g + penalty_grad_scale * theta.head(r);
    grad[r] = g.sum();

    hess.resize(r + 1, r + 1);
    const Eigen::MatrixXd root = cur.cwiseSqrt().asDiagonal() * z;
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(r, r);
    block.selfadjointView<Eigen::Lower>().rankUpdate(root.transpose());
    block.triangularView<Eigen::StrictlyUpper>() = block.transpose();
    block.diagonal().array() += penalty_hess;
    hess.topLeftCorner(r, r) = block;
    const Eigen::VectorXd cross = z.transpose() * cur;
    hess.topRightCorner(r, 1) = cross;
    hess.bottomLeftCorner(1, r) = cross.transpose();
    hess(r, r) = cur.sum();
  }
};

Eigen::VectorXd newton_direction(Eigen::MatrixXd hess, const Eigen::VectorXd& grad) {
  const Eigen::Index last = hess.rows() - 1;
  double jitter = 1e-12 * (1.0 + hess.diagonal().cwiseAbs().maxCoeff());
  for (int attempt = 0; attempt < 12; ++attempt) {
    try {
      return solve_spd(hess, -grad);
    } catch (const Error&) {
      // Only the intercept curvature can vanish (saturated or inactive rows).
      hess(last, last) += jitter;
      jitter *= 10.0;
    }
  }
  return -grad;
}

}  // namespace

ReducedFit solve_reduced(ModelKind kind, const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const Hyperparams& hp,
                         const ReducedFit* start) {
  hp.validate();
  if (z.rows() != y.size()) throw Error(ErrorCode::LengthMismatch, "design rows != targets");
  ReducedFit fit;
  const Eigen::Index r = z.cols();

  if (kind == ModelKind::Ridge) {
    const double ybar = y.mean();
    Eigen::MatrixXd a = z.transpose() * z;
    a.diagonal().array() += hp.regularization;
    const Eigen::VectorXd rhs = z.transpose() * (y.array() - ybar).matrix();
    fit.u = r > 0 ? solve_spd(a, rhs) : Eigen::VectorXd();
    fit.offset = ybar;
    return fit;
  }

  const Smooth f{kind, z, y, hp.regularization};
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(r + 1);
  if (start && start->u.size() == r) {
    theta.head(r) = start->u;
    theta[r] = start->offset;
  }
  double value = f.value(theta);
  fit.objective_trace.push_back(value);
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  fit.converged = false;
  for (int it = 0; it < hp.max_iterations; ++it) {
    f.derivatives(theta, grad, hess);
    if (grad.norm() <= hp.tolerance) {
      fit.converged = true;
      break;
    }
    const Eigen::VectorXd dir = newton_direction(hess, grad);
    double slope = grad.dot(dir);
    Eigen::VectorXd step = dir;
    if (!(slope < 0)) {
      step = -grad;
      slope = -grad.squaredNorm();
    }
    double t = 1.0;
    bool accepted = false;
    // Predicted decrease below the rounding level of the objective: the
    // comparison is noise, so take the full Newton step.
    if (-slope <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(value))) {
      theta += step;
      value = f.value(theta);
      accepted = true;
    }
    for (int ls = 0; ls < 60 && !accepted; ++ls) {
      const Eigen::VectorXd trial = theta + t * step;
      const double v = f.value(trial);
      if (v <= value + 1e-4 * t * slope) {
        theta = trial;
        value = v;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    fit.iterations = it + 1;
    if (!accepted) break;  // no representable descent left
    fit.objective_trace.push_back(value);
  }
  if (!fit.converged) {
    f.derivatives(theta, grad, hess);
    fit.converged = grad.norm() <= hp.tolerance;
  }
  fit.u = theta.head(r);
  fit.offset = theta[r];
  return fit;
}

double objective(ModelKind kind, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                 double b, double regularization) {
  const Eigen::VectorXd s = (x * w).array() + b;
  double loss = 0.0;
  switch (kind) {
    case ModelKind::Ridge:
      return (s - y).squaredNorm() + regularization * w.squaredNorm();
    case ModelKind::Logistic:
      for (Eigen::Index i = 0; i < s.size(); ++i) loss += softplus(-y[i] * s[i]);
      return loss + w.squaredNorm() / (2.0 * regularization);
    case ModelKind::LinearSvm:
      for (Eigen::Index i = 0; i < s.size(); ++i) {
        const double h = std::max(0.0, 1.0 - y[i] * s[i]);
        loss += h * h;
      }
      return 0.5 * w.squaredNorm() + regularization * loss;
  }
  return loss;
}

Eigen::VectorXd objective_gradient(ModelKind kind, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& w, double b, double regularization) {
  const Eigen::VectorXd s = (x * w).array() + b;
  Eigen::VectorXd g(s.size());
  Eigen::VectorXd penalty;
  switch (kind) {
    case ModelKind::Ridge:
      g = 2.0 * (s - y);
      penalty = 2.0 * regularization * w;
      break;
    case ModelKind::Logistic:
      for (Eigen::Index i = 0; i < s.size(); ++i) g[i] = -y[i] * sigmoid(-y[i] * s[i]);
      penalty = w / regularization;
      break;
    case ModelKind::LinearSvm:
      for (Eigen::Index i = 0; i < s.size(); ++i) {
        const double h = 1.0 - y[i] * s[i];
        g[i] = h > 0 ? -2.0 * regularization * y[i] * h : 0.0;
      }
      penalty = w;
      break;
  }
  Eigen::VectorXd out(w.size() + 1);
  out.head(w.size()) = x.transpose() * g + penalty;
  out[w.size()] = g.sum();
  return out;
}

LinearModel fit(ModelKind kind, const FeatureMatrix& x, const Hyperparams& hp) {
  hp.validate();
  if (x.rows() == 0) throw Error(ErrorCode::TooFewSamples, "no training rows");
  for (Eigen::Index i = 0; i < x.targets.size(); ++i)
    if (x.targets[i] != 1.0 && x.targets[i] != -1.0) throw Error(ErrorCode::BadLabel, "targets must be +-1");

  const bool wide = x.values.cols() > x.values.rows();
  const ReducedDesign design = wide ? ReducedDesign::from_gram(gram_matrix(x.values))
                                    : ReducedDesign::from_features(x.values);
  const ReducedFit rf = solve_reduced(kind, design.z(), x.targets, hp);

  LinearModel model;
  model.kind = kind;
  model.layout = x.layout;
  model.hyperparams = hp;
  model.weights = design.weights(rf.u, x.values);
  model.intercept = rf.offset - design.column_means(x.values).dot(model.weights);
  model.converged = rf.converged;
  model.iterations = rf.iterations;
  return model;
}

Eigen::VectorXd decision_scores(const LinearModel& model, const FeatureMatrix& x) {
  if (!(x.layout == model.layout) || x.values.cols() != model.weights.size())
    throw Error(ErrorCode::LayoutMismatch, "feature layout does not match the model");
  return (x.values * model.weights).array() + model.intercept;
}

StoichiometryClass predict_one(double score) {
  return score > 0.0 ? StoichiometryClass::OneEighty : StoichiometryClass::Sixty;
}

std::vector<StoichiometryClass> predict(const LinearModel& model, const FeatureMatrix& x) {
  const Eigen::VectorXd s = decision_scores(model, x);
  std::vector<StoichiometryClass> out(static_cast<std::size_t>(s.size()));
  for (Eigen::Index i = 0; i < s.size(); ++i) out[static_cast<std::size_t>(i)] = predict_one(s[i]);
  return out;
}

PositionalScore positional_weights(const LinearModel& model) {
  const auto& layout = model.layout;
  PositionalScore out;
  out.source = "abs_weight_sum";
  out.scores.assign(layout.positions, 0.0);
  for (std::size_t f = 0; f < layout.features(); ++f)
    out.scores[layout.position_of(f)] += std::abs(model.weights[static_cast<Eigen::Index>(f)]);
  return out;
}

std::string model_to_json(const LinearModel& model) {
  nlohmann::json j;
  j["kind"] = to_string(model.kind);
  j["hyperparams"] = {{"regularization", model.hyperparams.regularization},
                      {"max_iterations", model.hyperparams.max_iterations},
                      {"tolerance", model.hyperparams.tolerance}};
  j["layout"] = {{"m", model.layout.positions},
                 {"c", model.layout.channels},
                 {"map_name", model.layout.map_name},
                 {"method", to_string(model.layout.method)}};
  j["intercept"] = model.intercept;
  j["converged"] = model.converged;
  j["weights"] = std::vector<double>(model.weights.data(), model.weights.data() + model.weights.size());
  return j.dump(1) + "\n";
}

LinearModel model_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    LinearModel m;
    m.kind = model_kind_from_string(j.at("kind").get<std::string>());
    const auto& hp = j.at("hyperparams");
    m.hyperparams.regularization = hp.at("regularization").get<double>();
    m.hyperparams.max_iterations = hp.at("max_iterations").get<int>();
    m.hyperparams.tolerance = hp.at("tolerance").get<double>();
    m.hyperparams.validate();
    const auto& lay = j.at("layout");
    m.layout.positions = lay.at("m").get<std::size_t>();
    m.layout.channels = lay.at("c").get<std::size_t>();
    m.layout.map_name = lay.at("map_name").get<std::string>();
    m.layout.method = encoding_method_from_string(lay.at("method").get<std::string>());
    m.intercept = j.at("intercept").get<double>();
    m.converged = j.value("converged", true);
    const auto w = j.at("weights").get<std::vector<double>>();
    if (w.size() != m.layout.features())
      throw Error(ErrorCode::LayoutMismatch, "weights length " + std::to_string(w.size()) + " != m*c");
    m.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    for (double v : w)
      if (!std::isfinite(v)) throw Error(ErrorCode::BadConfig, "non-finite weight");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadConfig, std::string("model JSON: ") + e.what());
  }
}

std::string weights_csv(const LinearModel& model) {
  const auto& layout = model.layout;
  const bool onehot = layout.method == EncodingMethod::OneHot;
  const EncodingMap* map = nullptr;
  if (onehot) map = &encoding_map_by_name(layout.map_name);
  std::string out = "position,category,weight\n";
  char buf[64];
  for (std::size_t f = 0; f < layout.features(); ++f) {
    const std::string category = onehot ? map->category_name(static_cast<int>(layout.channel_of(f)) + 1) : "label";
    std::snprintf(buf, sizeof buf, "%.17g", model.weights[static_cast<Eigen::Index>(f)]);
    out += std::to_string(layout.position_of(f)) + "," + category + "," + buf + "\n";
  }
  return out;
}

std::string positional_csv(const PositionalScore& score) {
  std::string out = "position,score\n";
  char buf[64];
  for (std::size_t p = 0; p < score.scores.size(); ++p) {
    std::snprintf(buf, sizeof buf, "%.17g", score.scores[p]);
    out += std::to_string(p) + "," + buf + "\n";
  }
  return out;
}

}  // namespace stoic
