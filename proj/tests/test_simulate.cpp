#include "lgspec/simulate.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

using namespace lgspec;

namespace {

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd x = a.array() - a.mean();
  const Eigen::VectorXd y = b.array() - b.mean();
  return x.dot(y) / (x.norm() * y.norm());
}

}  // namespace

TEST(Seeding, DerivedSeedsAreDistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t stream = 0; stream < 4; ++stream) {
    for (std::uint64_t i = 0; i < 500; ++i) seen.insert(derive_seed(42, stream, i));
  }
  EXPECT_EQ(seen.size(), 2000u);
  EXPECT_EQ(derive_seed(42, 1, 7), derive_seed(42, 1, 7));
  EXPECT_NE(derive_seed(42, 1, 7), derive_seed(43, 1, 7));
}

TEST(GaussianWn, Deterministic) {
  EXPECT_EQ(gaussian_wn(100, 0.35, 9).values, gaussian_wn(100, 0.35, 9).values);
  EXPECT_NE(gaussian_wn(100, 0.35, 9).values, gaussian_wn(100, 0.35, 10).values);
}

TEST(GaussianWn, IndependentColumns) {
  const Eigen::Index n = 5000;
  const MultivariateSeries s = gaussian_wn(n, 0.0, 1);
  EXPECT_LT(std::abs(correlation(s.column(0), s.column(1))), 3.0 / std::sqrt(double(n)));
}

TEST(GaussianWn, CorrelationAndVariance) {
  const Eigen::Index n = 1859;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const MultivariateSeries s = gaussian_wn(n, 0.35, seed);
    EXPECT_NEAR(correlation(s.column(0), s.column(1)), 0.35, 0.07);
    for (int c = 0; c < 2; ++c) {
      const Eigen::VectorXd x = s.column(c);
      const double var = (x.array() - x.mean()).square().sum() / double(n - 1);
      EXPECT_NEAR(var, 1.0, 3.0 * std::sqrt(2.0 / double(n)));
    }
  }
  EXPECT_THROW(gaussian_wn(10, 1.0, 0), std::invalid_argument);
}

TEST(BivariateCosine, NoiselessCases) {
  const MultivariateSeries same = bivariate_cosine(500, {0.302, 0.0, 0.0}, 4);
  EXPECT_EQ(same.column(0), same.column(1));
  EXPECT_LE(same.column(0).cwiseAbs().maxCoeff(), 1.0);

  const MultivariateSeries shifted = bivariate_cosine(500, {0.302, std::numbers::pi / 3, 0.0}, 4);
  EXPECT_LE(shifted.column(0).cwiseAbs().maxCoeff(), 1.0);
  EXPECT_GT((shifted.column(0) - shifted.column(1)).cwiseAbs().maxCoeff(), 0.1);
}

TEST(BivariateCosine, SharedNoise) {
  const CosineParams p{0.302, 0.0, 0.75};
  const MultivariateSeries s = bivariate_cosine(300, p, 11);
  // With theta = 0 the coordinates coincide even with noise.
  EXPECT_EQ(s.column(0), s.column(1));
  EXPECT_THROW(bivariate_cosine(10, {0.6, 0.0, 1.0}, 0), std::invalid_argument);
  EXPECT_THROW(bivariate_cosine(10, {0.3, 0.0, -1.0}, 0), std::invalid_argument);
}

TEST(LocalTrig, SingleComponentIsDeterministicCosine) {
  LocalTrigParams p;
  p.levels = {0.5};
  p.amplitude = {0.8};
  p.amplitude_alt = {0.8};
  p.alpha = {0.1};
  p.theta = {0.0};
  p.prob = {1.0};
  const MultivariateSeries s = local_trigonometric(200, p, 3);
  EXPECT_EQ(s.column(0), s.column(1));
  const Eigen::VectorXd centred = s.column(0).array() - 0.5;
  EXPECT_LE(centred.cwiseAbs().maxCoeff(), 0.8 + 1e-12);
  EXPECT_GE(centred.cwiseAbs().maxCoeff(), 0.8 * std::cos(0.1 * std::numbers::pi));
  // A pure cosine: x_{t+1} + x_{t-1} = 2 cos(2 pi alpha) x_t.
  for (Eigen::Index t = 1; t + 1 < 200; ++t) {
    EXPECT_NEAR(centred[t + 1] + centred[t - 1], 2.0 * std::cos(0.2 * std::numbers::pi) * centred[t], 1e-12);
  }
}

TEST(LocalTrig, RegimeBoundsAndFrequencies) {
  const LocalTrigParams p = LocalTrigParams::common_phase();
  const Eigen::Index n = 20000;
  std::vector<int> regimes;
  const MultivariateSeries s = local_trigonometric(n, p, 77, regimes);
  std::vector<double> count(4, 0.0);
  for (Eigen::Index t = 0; t < n; ++t) {
    const int i = regimes[static_cast<std::size_t>(t)];
    const double reach = std::max(p.amplitude[i], p.amplitude_alt[i]) + 1e-12;
    EXPECT_LE(std::abs(s.values(t, 0) - p.levels[i]), reach);
    EXPECT_LE(std::abs(s.values(t, 1) - p.levels[i]), reach);
    count[i] += 1.0;
  }
  for (int i = 0; i < 4; ++i) {
    const double pi = p.prob[i];
    EXPECT_NEAR(count[i] / double(n), pi, 3.0 * std::sqrt(pi * (1.0 - pi) / double(n))) << i;
  }
}

TEST(LocalTrig, Presets) {
  const LocalTrigParams a = LocalTrigParams::common_phase();
  const LocalTrigParams b = LocalTrigParams::individual_phases();
  EXPECT_NO_THROW(a.validate());
  EXPECT_NO_THROW(b.validate());
  EXPECT_EQ(a.alpha, (std::vector<double>{0.267, 0.091, 0.431, 0.270}));
  for (double t : a.theta) EXPECT_DOUBLE_EQ(t, std::numbers::pi / 3);
  EXPECT_DOUBLE_EQ(b.theta[1], std::numbers::pi / 4);
  EXPECT_DOUBLE_EQ(b.theta[3], std::numbers::pi / 2);
}

TEST(LocalTrig, RejectsBadProbabilities) {
  LocalTrigParams p = LocalTrigParams::common_phase();
  p.prob = {0.05, 0.28, 0.33, 0.33};
  EXPECT_THROW(p.validate(), std::invalid_argument);
  EXPECT_THROW(local_trigonometric(10, p, 0), std::invalid_argument);
  p.prob = {0.05, 0.28 + 0.01 + 1e-10, 0.33, 0.33};
  EXPECT_NO_THROW(p.validate());
}

TEST(Simulate, DispatchesAndIsDeterministic) {
  const ModelSpec models[] = {GaussianWnParams{0.35}, CosineParams{}, LocalTrigParams::individual_phases()};
  for (const auto& m : models) {
    const MultivariateSeries a = simulate(m, 256, derive_seed(1, 0, 3));
    const MultivariateSeries b = simulate(m, 256, derive_seed(1, 0, 3));
    const MultivariateSeries c = simulate(m, 256, derive_seed(1, 0, 4));
    EXPECT_EQ(a.values, b.values) << model_name(m);
    EXPECT_NE(a.values, c.values) << model_name(m);
    EXPECT_EQ(a.size(), 256);
    EXPECT_EQ(a.dims(), 2);
  }
  FixedSeries f{gaussian_wn(50, 0.1, 1)};
  EXPECT_EQ(simulate(f, 0, 123).values, f.data.values);
  EXPECT_EQ(model_name(f), "fixed");
}
