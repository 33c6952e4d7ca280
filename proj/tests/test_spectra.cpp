#include "lgspec/simulate.hpp"
#include "lgspec/spectra.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace lgspec;

namespace {

LagCorrelations zeros(int m) {
  LagCorrelations c;
  c.forward = Eigen::VectorXd::Zero(m + 1);
  c.reflected = Eigen::VectorXd::Zero(m);
  return c;
}

LagCorrelations random_correlations(int m, std::uint64_t seed) {
  Engine rng(seed);
  std::uniform_real_distribution<double> u(-0.99, 0.99);
  LagCorrelations c = zeros(m);
  for (auto& x : c.forward) x = u(rng);
  for (auto& x : c.reflected) x = u(rng);
  return c;
}

}  // namespace

TEST(LagWindows, TukeyHanningValues) {
  EXPECT_DOUBLE_EQ(tukey_hanning(0, 10), 1.0);
  EXPECT_NEAR(tukey_hanning(10, 10), 0.0, 1e-16);
  EXPECT_NEAR(tukey_hanning(5, 10), 0.5, 1e-15);
  EXPECT_EQ(tukey_hanning(11, 10), 0.0);
  EXPECT_DOUBLE_EQ(tukey_hanning(-3, 10), tukey_hanning(3, 10));
}

TEST(LagWindows, OtherShapesAndNames) {
  EXPECT_DOUBLE_EQ(lag_window_weight(LagWindow::bartlett, 5, 10), 0.5);
  EXPECT_DOUBLE_EQ(lag_window_weight(LagWindow::parzen, 0, 10), 1.0);
  EXPECT_DOUBLE_EQ(lag_window_weight(LagWindow::parzen, 5, 10), 0.25);
  for (LagWindow w : {LagWindow::tukey_hanning, LagWindow::bartlett, LagWindow::parzen}) {
    EXPECT_EQ(lag_window_from_string(to_string(w)), w);
  }
  EXPECT_THROW(lag_window_from_string("boxcar"), std::invalid_argument);
}

TEST(SinCos, ExactAtQuarterMultiples) {
  EXPECT_EQ(sincos_two_pi(0.5).first, 0.0);
  EXPECT_EQ(sincos_two_pi(0.5).second, -1.0);
  EXPECT_EQ(sincos_two_pi(3.0).first, 0.0);
  EXPECT_EQ(sincos_two_pi(0.25).second, 0.0);
  EXPECT_NEAR(sincos_two_pi(0.1).first, std::sin(0.2 * std::numbers::pi), 1e-15);
}

TEST(FrequencyGrid, UniformAndLookup) {
  const FrequencyGrid g = FrequencyGrid::uniform(1024);
  EXPECT_EQ(g.size(), 1024);
  EXPECT_EQ(g[0], 0.0);
  EXPECT_EQ(g[1023], 0.5);
  EXPECT_EQ(g.find(g[300]), 300);
  EXPECT_EQ(g.find(0.30200001), -1);
  EXPECT_EQ(g.nearest(0.302), 618);
  EXPECT_THROW(FrequencyGrid(Eigen::Vector2d(0.3, 0.2)), std::invalid_argument);
  EXPECT_THROW(FrequencyGrid(Eigen::Vector2d(0.1, 0.6)), std::invalid_argument);
}

TEST(FoldSpectrum, WhiteNoiseLevelIsFlatOne) {
  LagCorrelations c = zeros(10);
  c.forward[0] = 1.0;
  const SpectrumEstimate s = make_spectrum(c, LagWindow::tukey_hanning, FrequencyGrid::uniform(64), {});
  EXPECT_TRUE((s.co.array() == 1.0).all());
  EXPECT_TRUE((s.quad.array() == 0.0).all());
  EXPECT_TRUE((s.phase.array() == 0.0).all());
}

TEST(FoldSpectrum, SingleForwardTerm) {
  const int m = 10;
  LagCorrelations c = zeros(m);
  c.forward[1] = 0.4;
  const FrequencyGrid g = FrequencyGrid::uniform(101);
  const Eigen::VectorXcd f = fold_spectrum(c, LagWindow::tukey_hanning, g.values());
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    const std::complex<double> expected =
        tukey_hanning(1, m) * 0.4 * std::exp(std::complex<double>(0.0, -2.0 * std::numbers::pi * g[j]));
    EXPECT_NEAR(std::abs(f[j] - expected), 0.0, 1e-14);
  }
}

TEST(FoldSpectrum, MissingLagIsAnError) {
  LagCorrelations c = zeros(5);
  c.reflected.resize(3);
  EXPECT_THROW(fold_spectrum(c, LagWindow::tukey_hanning, FrequencyGrid::uniform(8).values()), std::invalid_argument);
}

TEST(SpectrumInvariants, HoldForRandomCorrelationSets) {
  const FrequencyGrid g = FrequencyGrid::uniform(513);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const LagCorrelations c = random_correlations(10, seed);
    const SpectrumEstimate s = make_spectrum(c, LagWindow::tukey_hanning, g, {});
    EXPECT_EQ(s.quad[0], 0.0);
    EXPECT_EQ(s.quad[g.size() - 1], 0.0);
    for (Eigen::Index j = 0; j < g.size(); ++j) {
      EXPECT_GE(s.amplitude[j], std::abs(s.co[j]));
      EXPECT_GE(s.amplitude[j], std::abs(s.quad[j]));
      EXPECT_GT(s.phase[j], -std::numbers::pi);
      EXPECT_LE(s.phase[j], std::numbers::pi);
      if (std::abs(s.co[j]) > 1e-6) {
        EXPECT_NEAR(-s.quad[j] / s.co[j], std::tan(s.phase[j]), 1e-10 * std::max(1.0, std::abs(std::tan(s.phase[j]))));
      }
    }
  }
}

TEST(SpectrumInvariants, FullPeriodMeanRecoversLagZero) {
  const int m = 10;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const LagCorrelations c = random_correlations(m, 100 + seed);
    for (Eigen::Index N : {21, 64, 1024}) {
      const Eigen::VectorXcd f = fold_spectrum(c, LagWindow::tukey_hanning, full_period_frequencies(N));
      EXPECT_NEAR(f.real().mean(), c.forward[0], 1e-12);
      EXPECT_NEAR(f.imag().mean(), 0.0, 1e-12);
    }
  }
}

TEST(ConjugateFold, RandomSetsAllHold) {
  const FrequencyGrid g = FrequencyGrid::uniform(257);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    EXPECT_TRUE(conjugate_fold_check(random_correlations(1 + seed % 15, seed), LagWindow::tukey_hanning, g));
  }
}

TEST(ConjugateFold, SymmetricCorrelationsGiveRealSpectrum) {
  LagCorrelations c = random_correlations(8, 5);
  c.reflected = c.forward.tail(8);
  const FrequencyGrid g = FrequencyGrid::uniform(129);
  EXPECT_TRUE(conjugate_fold_check(c, LagWindow::tukey_hanning, g));
  const Eigen::VectorXcd f = fold_spectrum(c, LagWindow::tukey_hanning, g.values());
  EXPECT_LT(f.imag().cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SwapRoles, ExchangesDirections) {
  LagCorrelations c = random_correlations(4, 9);
  const LagCorrelations s = swap_roles(c);
  EXPECT_EQ(s.forward[0], c.forward[0]);
  EXPECT_EQ(s.forward.tail(4), c.reflected);
  EXPECT_EQ(s.reflected, c.forward.tail(4));
}

TEST(LocalAutoSpectrum, DiagonalPointIsReal) {
  const MultivariateSeries s = gaussian_wn(1500, 0.0, 3);
  const PseudoNormalizedSeries z = pseudo_normalize(s);
  const FrequencyGrid g = FrequencyGrid::uniform(128);
  const SpectrumEstimate f =
      local_auto_spectrum(z.column(0), {0.5, 0.5}, {0.6, 0.6}, 10, ApproxOrder::five, LagWindow::tukey_hanning, g);
  EXPECT_LT(f.quad.cwiseAbs().maxCoeff(), 1e-14);
  // Independent draws: spectrum near the white-noise level 1.
  EXPECT_NEAR(f.co.mean(), 1.0, 0.15);
}

TEST(LocalAutoSpectrum, WhiteNoiseLevelOverFullPeriod) {
  const PseudoNormalizedSeries z = pseudo_normalize(gaussian_wn(800, 0.0, 4));
  const LocalCorrelationSet set = local_auto_correlations(z.column(0), {-1.0, 0.3}, {0.6, 0.6}, 6, ApproxOrder::one);
  EXPECT_EQ(set.rho.forward[0], 1.0);
  const Eigen::VectorXcd f = fold_spectrum(set.rho, LagWindow::tukey_hanning, full_period_frequencies(50));
  EXPECT_NEAR(f.real().mean(), 1.0, 1e-12);
}

TEST(GlobalSpectrum, WhiteNoiseLevels) {
  const FrequencyGrid g = FrequencyGrid::uniform(128);
  const PseudoNormalizedSeries indep = pseudo_normalize(gaussian_wn(4000, 0.0, 8));
  const SpectrumEstimate a = global_cross_spectrum(indep.column(0), indep.column(1), 10, LagWindow::tukey_hanning, g);
  EXPECT_LT(a.co.cwiseAbs().maxCoeff(), 0.15);

  const PseudoNormalizedSeries corr = pseudo_normalize(gaussian_wn(4000, 0.35, 8));
  const SpectrumEstimate b = global_cross_spectrum(corr.column(0), corr.column(1), 10, LagWindow::tukey_hanning, g);
  EXPECT_NEAR(b.co.mean(), 0.35, 0.05);
  EXPECT_LT((b.co.array() - 0.35).abs().maxCoeff(), 0.15);
  EXPECT_EQ(b.config.kind, SpectrumKind::global);
}

TEST(GlobalCorrelations, MatchPearsonOfLagPairs) {
  const PseudoNormalizedSeries z = pseudo_normalize(gaussian_wn(300, 0.2, 6));
  const LagCorrelations c = global_cross_correlations(z.column(0), z.column(1), 3);
  const LagPairSet p = lag_pairs(z.column(1), z.column(0), 2, PairOrder::lk);
  const Eigen::VectorXd x = p.pairs.col(0).array() - p.pairs.col(0).mean();
  const Eigen::VectorXd y = p.pairs.col(1).array() - p.pairs.col(1).mean();
  EXPECT_NEAR(c.reflected[1], x.dot(y) / (x.norm() * y.norm()), 1e-14);
}

TEST(LocalCrossSpectrum, FoldCheckHoldsForEstimates) {
  const PseudoNormalizedSeries z = pseudo_normalize(bivariate_cosine(1000, {0.302, std::numbers::pi / 3, 0.75}, 2));
  const LocalCorrelationSet set =
      local_cross_correlations(z.column(0), z.column(1), {-1.28, 1.28}, {0.6, 0.6}, 10, ApproxOrder::five);
  const FrequencyGrid g = FrequencyGrid::uniform(256);
  EXPECT_TRUE(conjugate_fold_check(set.rho, LagWindow::tukey_hanning, g));
  const SpectrumEstimate s = local_cross_spectrum(set, LagWindow::tukey_hanning, g);
  EXPECT_EQ(s.quad[0], 0.0);
  EXPECT_EQ(s.config.point, (Point{-1.28, 1.28}));
}
