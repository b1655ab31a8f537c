#include "stoic/influence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "stoic/parallel.hpp"
#include "stoic/rng.hpp"

namespace stoic {

std::string to_string(SelectionMethod method) {
  switch (method) {
    case SelectionMethod::TruncationPrefix: return "prefix";
    case SelectionMethod::WeightRanking: return "weights";
    case SelectionMethod::VarianceRanking: return "variance";
    case SelectionMethod::LaplacianScore: return "laplacian";
  }
  return "unknown";
}

SelectionMethod selection_method_from_string(const std::string& s) {
  if (s == "prefix") return SelectionMethod::TruncationPrefix;
  if (s == "weights") return SelectionMethod::WeightRanking;
  if (s == "variance") return SelectionMethod::VarianceRanking;
  if (s == "laplacian") return SelectionMethod::LaplacianScore;
  throw Error(ErrorCode::BadConfig, "unknown selection method '" + s + "' (expected prefix|weights|variance|laplacian)");
}

Eigen::MatrixXd NeighborGraph::laplacian() const {
  Eigen::MatrixXd l = -similarity;
  l.diagonal() += degree;
  return l;
}

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& gram) {
  const Eigen::Index n = gram.rows();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) d(i, j) = std::max(0.0, gram(i, i) + gram(j, j) - 2.0 * gram(i, j));
  return d;
}

double default_kernel_width(const Eigen::MatrixXd& sq_dist) {
  const Eigen::Index n = sq_dist.rows();
  double sum = 0.0;
  std::size_t pairs = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      sum += sq_dist(i, j);
      ++pairs;
    }
  const double mean = pairs ? sum / static_cast<double>(pairs) : 0.0;
  return mean > 0.0 ? mean : 1.0;
}

namespace {

NeighborGraph graph_from_distances(const Eigen::MatrixXd& dist, std::size_t k, double t) {
  const Eigen::Index n = dist.rows();
  if (static_cast<std::size_t>(n) < k + 1 || k == 0)
    throw Error(ErrorCode::TooFewSamples, "kNN graph needs n >= k + 1 and k >= 1");
  NeighborGraph g;
  g.k = k;
  g.t = t > 0.0 ? t : default_kernel_width(dist);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> linked =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return dist(i, a) < dist(i, b); });
    std::size_t taken = 0;
    for (Eigen::Index j : order) {
      if (j == i) continue;
      linked(i, j) = linked(j, i) = true;
      if (++taken == k) break;
    }
  }
  g.similarity = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (linked(i, j)) g.similarity(i, j) = std::exp(-dist(i, j) / g.t);
  g.degree = g.similarity.rowwise().sum();
  return g;
}

}  // namespace

NeighborGraph build_knn_graph(const Eigen::MatrixXd& x, std::size_t k, double t) {
  return graph_from_distances(squared_distances(gram_matrix(x)), k, t);
}

Eigen::VectorXd laplacian_scores(const Eigen::MatrixXd& x, const NeighborGraph& graph) {
  const Eigen::Index n = x.rows();
  if (graph.similarity.rows() != n) throw Error(ErrorCode::LengthMismatch, "graph size != rows");
  const Eigen::VectorXd& d = graph.degree;
  const double total_degree = d.sum();
  const Eigen::RowVectorXd weighted_mean = (d.transpose() * x) / total_degree;
  const Eigen::MatrixXd centered = x.rowwise() - weighted_mean;
  const Eigen::MatrixXd lf = d.asDiagonal() * centered - graph.similarity * centered;

  Eigen::VectorXd scores(x.cols());
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    const auto col = x.col(f);
    if ((col.array() == col[0]).all()) {
      scores[f] = kLaplacianSentinel;
      continue;
    }
    const double num = centered.col(f).dot(lf.col(f));
    const double den = (centered.col(f).array().square() * d.array()).sum();
    scores[f] = den > 0.0 ? num / den : kLaplacianSentinel;
  }
  return scores;
}

Eigen::VectorXd laplacian_scores(const Eigen::MatrixXd& x, std::size_t k, double t) {
  return laplacian_scores(x, build_knn_graph(x, k, t));
}

Eigen::VectorXd variance_scores(const Eigen::MatrixXd& x) {
  if (x.rows() < 2) throw Error(ErrorCode::TooFewSamples, "variance needs at least two rows");
  const Eigen::RowVectorXd mean = x.colwise().mean();
  return ((x.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(x.rows())).transpose();
}

PositionalScore positional_aggregate(const Eigen::VectorXd& feature_scores, const FeatureLayout& layout,
                                     Direction direction) {
  if (static_cast<std::size_t>(feature_scores.size()) != layout.features())
    throw Error(ErrorCode::LayoutMismatch, "feature score count != layout features");
  PositionalScore out;
  out.scores.assign(layout.positions, 0.0);
  if (direction == Direction::HigherBetter) {
    out.source = "channel_sum";
    for (std::size_t f = 0; f < layout.features(); ++f)
      out.scores[layout.position_of(f)] += feature_scores[static_cast<Eigen::Index>(f)];
    return out;
  }
  out.source = "channel_mean";
  for (std::size_t p = 0; p < layout.positions; ++p) {
    double sum = 0.0;
    std::size_t finite = 0;
    for (std::size_t c = 0; c < layout.channels; ++c) {
      const double v = feature_scores[static_cast<Eigen::Index>(layout.feature_of(p, c))];
      if (std::isfinite(v)) {
        sum += v;
        ++finite;
      }
    }
    out.scores[p] = finite ? sum / static_cast<double>(finite) : kLaplacianSentinel;
  }
  return out;
}

std::size_t selection_count(std::size_t positions, double percent) {
  if (!(percent > 0.0) || percent > 100.0)
    throw Error(ErrorCode::BadPercent, "percent must lie in (0, 100], got " + std::to_string(percent));
  const auto count = static_cast<std::size_t>(std::floor(static_cast<double>(positions) * percent / 100.0 + 1e-9));
  return std::min(positions, std::max<std::size_t>(1, count));
}

std::vector<std::size_t> select_prefix(std::size_t positions, double percent) {
  std::vector<std::size_t> out(selection_count(positions, percent));
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

std::vector<std::size_t> select_positions(const std::vector<double>& scores, double percent, Direction direction) {
  const std::size_t count = selection_count(scores.size(), percent);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return direction == Direction::HigherBetter ? scores[a] > scores[b] : scores[a] < scores[b];
  });
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<Eigen::Index> block_columns(const FeatureLayout& layout, const std::vector<std::size_t>& positions) {
  std::vector<std::size_t> sorted = positions;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<Eigen::Index> cols;
  cols.reserve(sorted.size() * layout.channels);
  for (auto p : sorted) {
    if (p >= layout.positions)
      throw Error(ErrorCode::PositionOutOfRange, "position " + std::to_string(p) + " >= " +
                                                     std::to_string(layout.positions));
    for (std::size_t c = 0; c < layout.channels; ++c) cols.push_back(static_cast<Eigen::Index>(layout.feature_of(p, c)));
  }
  return cols;
}

FeatureMatrix mask_matrix(const FeatureMatrix& x, const std::vector<std::size_t>& positions) {
  if (positions.empty()) throw Error(ErrorCode::Empty, "mask needs at least one position");
  const auto cols = block_columns(x.layout, positions);
  FeatureMatrix out = x;
  out.values.setZero();
  for (auto c : cols) out.values.col(c) = x.values.col(c);
  return out;
}

PositionRanking rank_positions(const FeatureMatrix& x, const std::vector<std::size_t>& rows, ModelKind kind,
                               SelectionMethod method, const CvConfig& cfg, std::uint64_t seed,
                               const AblationOptions& opts) {
  PositionRanking ranking;
  if (method == SelectionMethod::TruncationPrefix) return ranking;
  const Eigen::MatrixXd dev = x.values(rows, Eigen::all);
  switch (method) {
    case SelectionMethod::WeightRanking: {
      const Eigen::MatrixXd gram = gram_matrix(dev);
      const Eigen::VectorXd y = x.targets(rows);
      std::vector<std::size_t> local(rows.size());
      std::iota(local.begin(), local.end(), std::size_t{0});
      const Hyperparams hp = search_on_gram(gram, y, local, kind, cfg, seed).best;
      const ReducedDesign design = ReducedDesign::from_gram(gram);
      LinearModel model;
      model.kind = kind;
      model.layout = x.layout;
      model.weights = design.weights(solve_reduced(kind, design.z(), y, hp).u, dev);
      ranking.scores = positional_weights(model).scores;
      ranking.direction = Direction::HigherBetter;
      break;
    }
    case SelectionMethod::VarianceRanking:
      ranking.scores = positional_aggregate(variance_scores(dev), x.layout, Direction::HigherBetter).scores;
      ranking.direction = Direction::HigherBetter;
      break;
    case SelectionMethod::LaplacianScore:
      ranking.scores = positional_aggregate(laplacian_scores(dev, opts.knn, opts.kernel_width), x.layout,
                                            Direction::LowerBetter)
                           .scores;
      ranking.direction = Direction::LowerBetter;
      break;
    case SelectionMethod::TruncationPrefix:
      break;
  }
  return ranking;
}

std::vector<std::size_t> select_for_method(SelectionMethod method, const PositionRanking& ranking,
                                           std::size_t positions, double percent) {
  if (method == SelectionMethod::TruncationPrefix) return select_prefix(positions, percent);
  return select_positions(ranking.scores, percent, ranking.direction);
}

AblationResult ablation_run(const FeatureMatrix& x, ModelKind kind, SelectionMethod method, std::vector<double> grid,
                            const CvConfig& cfg, const AblationOptions& opts) {
  cfg.validate();
  if (grid.empty()) throw Error(ErrorCode::BadPercent, "empty percentage grid");
  for (double p : grid) selection_count(x.layout.positions, p);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  const auto labels = x.labels();
  std::vector<FoldAssignment> outer;
  for (std::size_t it = 0; it < cfg.iterations; ++it)
    outer.push_back(stratified_folds(labels, cfg.outer_folds, iteration_seed(cfg, it)));

  const std::size_t runs = cfg.iterations * cfg.outer_folds;
  // auroc[percent][run]; NaN marks an undefined test AUROC.
  std::vector<std::vector<double>> auroc_at(grid.size(), std::vector<double>(runs, std::nan("")));
  CvConfig inner_cfg = cfg;
  inner_cfg.jobs = 1;
  parallel_for(runs, cfg.jobs, [&](std::size_t task) {
    const std::size_t it = task / cfg.outer_folds;
    const std::size_t fold = task % cfg.outer_folds;
    const auto dev = outer[it].complement(fold);
    const auto test = outer[it].members(fold);
    const PositionRanking ranking =
        rank_positions(x, dev, kind, method, inner_cfg, search_seed(cfg, it, fold), opts);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const auto positions = select_for_method(method, ranking, x.layout.positions, grid[g]);
      const auto cols = block_columns(x.layout, positions);
      const Eigen::MatrixXd gram = gram_matrix(x.values(Eigen::all, cols));
      const RunResult r = evaluate_outer_fold(gram, x.targets, dev, test, kind, inner_cfg, it, fold);
      if (r.test.auroc) auroc_at[g][task] = *r.test.auroc;
    }
  });

  AblationResult result;
  result.method = method;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<double> defined;
    for (double v : auroc_at[g])
      if (!std::isnan(v)) defined.push_back(v);
    AblationPoint point;
    point.percent = grid[g];
    point.auroc = summarize(defined);
    point.runs = defined.size();
    result.points.push_back(point);
  }
  const auto best = std::max_element(result.points.begin(), result.points.end(), [](const auto& a, const auto& b) {
    return a.auroc.mean < b.auroc.mean;  // first maximum wins: lowest percent on ties
  });
  result.best_percent = best->percent;
  result.best_mean_auroc = best->auroc.mean;

  std::vector<std::size_t> all(x.rows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const PositionRanking full = rank_positions(x, all, kind, method, inner_cfg, derive_seed(cfg.base_seed, 0), opts);
  result.best_positions = select_for_method(method, full, x.layout.positions, result.best_percent);
  return result;
}

std::vector<double> parse_grid(const std::string& spec) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw Error(ErrorCode::BadConfig, "bad grid value '" + s + "' in '" + spec + "'");
    return v;
  };
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() != 3) throw Error(ErrorCode::BadConfig, "grid must be start:stop:step, got '" + spec + "'");
    const double start = number(parts[0]), stop = number(parts[1]), step = number(parts[2]);
    if (!(step > 0.0) || stop < start) throw Error(ErrorCode::BadConfig, "grid needs step > 0 and stop >= start");
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i) out.push_back(start + static_cast<double>(i) * step);
  } else {
    std::stringstream ss(spec);
    for (std::string part; std::getline(ss, part, ',');) out.push_back(number(part));
  }
  if (out.empty()) throw Error(ErrorCode::BadConfig, "empty grid '" + spec + "'");
  for (double p : out)
    if (!(p > 0.0) || p > 100.0) throw Error(ErrorCode::BadPercent, "grid value outside (0, 100]: " + spec);
  return out;
}

std::string ablation_csv_header() { return "method,percent,mean_auroc,std_auroc,n_runs\n"; }

std::string ablation_csv_rows(const AblationResult& result) {
  std::string out;
  char buf[128];
  for (const auto& p : result.points) {
    std::snprintf(buf, sizeof buf, "%s,%g,%.6f,%.6f,%zu\n", to_string(result.method).c_str(), p.percent,
                  p.auroc.mean, p.auroc.std, p.runs);
    out += buf;
  }
  return out;
}

std::string positions_json(const std::vector<AblationResult>& results) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& r : results) {
    j[to_string(r.method)] = {{"best_percent", r.best_percent},
                              {"mean_auroc", r.best_mean_auroc},
                              {"positions", r.best_positions}};
  }
  return j.dump(2) + "\n";
}

}  // namespace stoic
