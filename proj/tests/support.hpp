#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "stoic/dataset.hpp"
#include "stoic/encoding.hpp"

namespace testing {

// Generators for property tests. std::mt19937_64 is fine here: cases only
// need to be reproducible within one build.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  std::size_t size(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(eng_); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(eng_); }

  Eigen::MatrixXd matrix(Eigen::Index rows, Eigen::Index cols, double lo = -1.0, double hi = 1.0) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = real(lo, hi);
    return m;
  }

  // Scores drawn from a small pool so ties are common.
  Eigen::VectorXd tied_scores(Eigen::Index n, int levels) {
    Eigen::VectorXd s(n);
    for (Eigen::Index i = 0; i < n; ++i) s[i] = static_cast<double>(size(0, static_cast<std::size_t>(levels - 1))) / 4.0;
    return s;
  }

  // +-1 labels with at least one of each class (n >= 2).
  Eigen::VectorXd labels(Eigen::Index n) {
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = coin() ? 1.0 : -1.0;
    y[0] = 1.0;
    y[n - 1] = -1.0;
    return y;
  }

  std::string sequence(std::size_t lo, std::size_t hi) {
    static const std::string residues = "ACDEFGHIKLMNPQRSTVWY";
    std::string s(size(lo, hi), 'A');
    for (auto& c : s) c = residues[size(0, residues.size() - 1)];
    return s;
  }

  // Balanced synthetic corpus; OneEighty rows carry a motif near the start.
  stoic::StoichiometryDataset dataset(std::size_t per_class, std::size_t lo, std::size_t hi, double motif_rate = 0.8) {
    std::vector<stoic::ProteinRecord> records;
    for (int cls = 0; cls < 2; ++cls) {
      for (std::size_t i = 0; i < per_class; ++i) {
        std::string s = sequence(lo, hi);
        if (s.size() > 8 && coin(motif_rate)) s.replace(2, 4, cls == 1 ? "KRHK" : "DEGA");
        const auto label = cls == 1 ? stoic::StoichiometryClass::OneEighty : stoic::StoichiometryClass::Sixty;
        records.push_back({(cls == 1 ? "P" : "N") + std::to_string(i), s, label});
      }
    }
    return stoic::StoichiometryDataset(std::move(records), 0 + hi);
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

inline stoic::FeatureMatrix make_features(const Eigen::MatrixXd& values, const Eigen::VectorXd& targets) {
  stoic::FeatureMatrix x;
  x.values = values;
  x.targets = targets;
  x.layout.positions = static_cast<std::size_t>(values.cols());
  x.layout.channels = 1;
  x.layout.map_name = "charprotset";
  x.layout.method = stoic::EncodingMethod::IntegerLabel;
  for (Eigen::Index i = 0; i < values.rows(); ++i) x.row_ids.push_back("r" + std::to_string(i));
  return x;
}

// Random values laid out as `positions` blocks of `channels` columns.
inline stoic::FeatureMatrix layout_matrix(Gen& g, std::size_t positions, std::size_t channels, std::size_t rows) {
  stoic::FeatureMatrix x;
  x.layout.positions = positions;
  x.layout.channels = channels;
  x.layout.map_name = "clusters";
  x.layout.method = stoic::EncodingMethod::OneHot;
  x.values = g.matrix(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(positions * channels));
  x.targets = g.labels(static_cast<Eigen::Index>(rows));
  return x;
}

}  // namespace testing
