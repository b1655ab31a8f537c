#include <doctest.h>

#include <algorithm>

#include "stoic/metrics.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace stoic;
using namespace testing;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::vector<StoichiometryClass> classes(std::initializer_list<int> v) {
  std::vector<StoichiometryClass> out;
  for (int c : v) out.push_back(c ? StoichiometryClass::OneEighty : StoichiometryClass::Sixty);
  return out;
}

}  // namespace

TEST_CASE("auroc examples") {
  CHECK(auroc(vec({0.8, 0.35, 0.4, 0.1}), vec({1, 1, -1, -1})) == 0.75);
  CHECK(auroc(vec({3, 4, 1, 2}), vec({1, 1, -1, -1})) == 1.0);
  CHECK(auroc(vec({2, 2, 2, 2, 2}), vec({1, -1, 1, -1, -1})) == 0.5);
}

TEST_CASE("auroc errors") {
  CHECK_THROWS_AS(auroc(vec({1, 2}), vec({1, 1})), Error);
  CHECK_THROWS_AS(auroc(vec({1, 2}), vec({1})), Error);
  try {
    auroc(vec({1, 2}), vec({-1, -1}));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OneClassOnly);
  }
}

TEST_CASE("auroc equals pairwise oracle with ties") {
  testing::Gen g(10);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = static_cast<Eigen::Index>(g.size(2, 120));
    const Eigen::VectorXd s = g.tied_scores(n, static_cast<int>(g.size(1, 12)));
    const Eigen::VectorXd y = g.labels(n);
    CHECK(std::abs(auroc(s, y) - pairwise_auroc(s, y)) <= 1e-12);
  }
}

TEST_CASE("auroc invariant under increasing transforms") {
  testing::Gen g(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<Eigen::Index>(g.size(2, 60));
    const Eigen::VectorXd s = g.tied_scores(n, 9);
    const Eigen::VectorXd y = g.labels(n);
    const double a = g.real(0.1, 5), b = g.real(-3, 3);
    // Scalar exp: the vectorized one may split ties by an ulp.
    const Eigen::VectorXd t = s.unaryExpr([&](double v) { return std::exp(a * v + b); });
    CHECK(auroc(t, y) == auroc(s, y));
  }
}

TEST_CASE("auroc complement without ties") {
  testing::Gen g(12);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<Eigen::Index>(g.size(2, 80));
    const Eigen::VectorXd s = g.matrix(n, 1);
    const Eigen::VectorXd y = g.labels(n);
    CHECK(std::abs(auroc(s, y) + auroc(-s, y) - 1.0) < 1e-12);
  }
}

TEST_CASE("confusion examples") {
  CHECK(confusion(classes({1, 1, 1, 0, 0, 0}), classes({1, 1, 1, 0, 0, 0})) == ConfusionCounts{3, 0, 3, 0});
  CHECK(confusion(classes({1, 1, 1, 1}), classes({1, 1, 0, 0})) == ConfusionCounts{2, 2, 0, 0});
  CHECK_THROWS_AS(confusion(classes({1}), classes({1, 0})), Error);
}

TEST_CASE("report from counts") {
  const auto r = report_from_counts(ConfusionCounts{8, 3, 7, 2});
  CHECK(*r.sensitivity == doctest::Approx(0.8));
  CHECK(*r.specificity == doctest::Approx(0.7));
  CHECK(*r.precision == doctest::Approx(8.0 / 11.0));
  CHECK(*r.npv == doctest::Approx(7.0 / 9.0));
  CHECK_FALSE(r.auroc.has_value());
}

TEST_CASE("undefined metrics") {
  const auto r = report(vec({-1, -2, -0.5, 0}), vec({1, 1, -1, -1}));
  CHECK_FALSE(r.precision.has_value());
  CHECK(r.sensitivity.has_value());
  CHECK(*r.sensitivity == 0.0);
  CHECK(format_metric(r.precision) == "NA");
  CHECK(format_metric(0.25) == "0.250000");
  const auto one = report(vec({0.3, -0.2}), vec({1, 1}));
  CHECK_FALSE(one.auroc.has_value());
  CHECK_FALSE(one.specificity.has_value());
}

TEST_CASE("swapping classes exchanges sensitivity and specificity") {
  testing::Gen g(13);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<Eigen::Index>(g.size(2, 40));
    // No zero scores: the tie rule at 0 is asymmetric by design.
    Eigen::VectorXd s = g.matrix(n, 1);
    for (Eigen::Index i = 0; i < n; ++i)
      if (s[i] == 0.0) s[i] = 0.5;
    const Eigen::VectorXd y = g.labels(n);
    const auto a = report(s, y);
    const auto b = report(-s, -y);
    CHECK(a.sensitivity == b.specificity);
    CHECK(a.specificity == b.sensitivity);
    CHECK(a.precision == b.npv);
  }
}
