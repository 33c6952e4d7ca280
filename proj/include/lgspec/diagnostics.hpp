#pragma once

#include "lgspec/inference.hpp"

#include <cstdint>
#include <vector>

namespace lgspec {

/// Exhaustive minimisation of the p = 1 penalty over rho in (-0.999, 0.999).
/// The penalty is summed pair by pair here, independently of the moment-based
/// evaluation used by the optimiser.
double grid_oracle_p1(const LagPairSet& pairs, Point v, const Bandwidth& b, double step = 1e-4);

/// Worst relative error between the analytic penalty gradient and central
/// differences, over `trials` random parameter vectors.
double finite_difference_check(const LagPairSet& pairs, Point v, const Bandwidth& b, ApproxOrder order, int trials,
                               std::uint64_t seed);

struct CoincidencePoint {
  Point point;
  double max_gap = 0.0;          // max over the grid of |median local co - median global co|
  double coverage_co = 0.0;      // fraction of frequencies with rho inside the local co band
  double coverage_quad = 0.0;    // ... with 0 inside the local quad band
  double coverage_phase = 0.0;   // ... with 0 inside the local phase band
  double wider_fraction = 0.0;   // fraction where the local co band is wider than the global one
  std::size_t flagged = 0;
  bool pass = false;
};

struct CoincidenceReport {
  double rho = 0.0;
  double tolerance = 0.0;
  std::vector<CoincidencePoint> points;
  bool pass = false;
};

/// Gaussian white noise: local and global co-spectra should coincide.
/// A point passes when max_gap <= tolerance.
CoincidenceReport gaussian_coincidence_check(Eigen::Index n, double rho, std::span<const Point> points,
                                             const EstimationConfig& config, std::size_t R, std::uint64_t seed,
                                             double tolerance);

struct RateRow {
  Eigen::Index n = 0;
  double variance = 0.0;
  std::size_t used = 0;
};

struct RateReport {
  std::vector<RateRow> rows;
  double slope = 0.0;
  double slope_stderr = 0.0;
  double expected = -1.0;
};

/// Monte-Carlo variance of rho_hat(h) at a fixed bandwidth for each n, and the
/// least-squares slope of log variance against log n. For fixed b the
/// asymptotic normalisation sqrt(n (b1 b2)^{(p+1)/2}) predicts slope -1.
RateReport clt_rate_diagnostic(const ModelSpec& model, Point v, int h, ApproxOrder order, const Bandwidth& b,
                               std::span<const Eigen::Index> sizes, std::size_t R, std::uint64_t seed);

/// spread(phase) * amplitude / spread(amplitude) at one frequency, using the
/// 5%-95% inter-quantile ranges. Near 1 when the delta-method relations hold.
double phase_amplitude_spread_ratio(const BandEnsemble& ensemble, double omega);

}  // namespace lgspec
