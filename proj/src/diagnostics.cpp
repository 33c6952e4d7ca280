#include "lgspec/diagnostics.hpp"

#include "lgspec/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace lgspec {

double grid_oracle_p1(const LagPairSet& pairs, Point v, const Bandwidth& b, double step) {
  validate(b);
  const Eigen::Index n = pairs.size();
  std::vector<double> w(static_cast<std::size_t>(n)), ss(static_cast<std::size_t>(n)), xy(static_cast<std::size_t>(n));
  for (Eigen::Index t = 0; t < n; ++t) {
    const double x = pairs.pairs(t, 0);
    const double y = pairs.pairs(t, 1);
    const double u1 = (x - v.v1) / b.b1;
    const double u2 = (y - v.v2) / b.b2;
    w[t] = std::exp(-0.5 * (u1 * u1 + u2 * u2)) / (2.0 * std::numbers::pi * b.b1 * b.b2);
    ss[t] = x * x + y * y;
    xy[t] = x * y;
  }
  const double a = 1.0 + b.b1 * b.b1;
  const double c = 1.0 + b.b2 * b.b2;

  double best_rho = 0.0;
  double best = std::numeric_limits<double>::infinity();
  const auto steps = static_cast<long>(std::floor(2 * 0.999 / step + 1e-9));
  for (long j = 0; j <= steps; ++j) {
    const double rho = -0.999 + static_cast<double>(j) * step;
    const double one_minus = 1.0 - rho * rho;
    const double log_norm = -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(one_minus);
    double q = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
      const double log_psi = log_norm - (ss[t] - 2.0 * rho * xy[t]) / (2.0 * one_minus);
      q -= w[t] * log_psi;
    }
    // N(v; 0, [[a, rho], [rho, c]])
    const double det = a * c - rho * rho;
    const double quad = (c * v.v1 * v.v1 - 2.0 * rho * v.v1 * v.v2 + a * v.v2 * v.v2) / det;
    q += static_cast<double>(n) * std::exp(-0.5 * quad) / (2.0 * std::numbers::pi * std::sqrt(det));
    if (q < best) {
      best = q;
      best_rho = rho;
    }
  }
  return best_rho;
}

double finite_difference_check(const LagPairSet& pairs, Point v, const Bandwidth& b, ApproxOrder order, int trials,
                               std::uint64_t seed) {
  const WeightedMoments m = weighted_moments(pairs, v, b);
  Engine rng(seed);
  std::uniform_real_distribution<double> mu(-0.5, 0.5), sd(0.6, 1.5), corr(-0.8, 0.8);
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    GaussianParam g;
    g.order = order;
    g.rho = corr(rng);
    if (order == ApproxOrder::five) {
      g.mu1 = mu(rng);
      g.mu2 = mu(rng);
      g.sigma1 = sd(rng);
      g.sigma2 = sd(rng);
    }
    const Eigen::VectorXd theta = g.to_vector();
    const Eigen::VectorXd analytic = penalty_gradient(m, v, b, g);
    Eigen::VectorXd numeric(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      const double h = 1e-5 * std::max(1.0, std::abs(theta[i]));
      Eigen::VectorXd up = theta, down = theta;
      up[i] += h;
      down[i] -= h;
      numeric[i] = (penalty(m, v, b, GaussianParam::from_vector(order, up)) -
                    penalty(m, v, b, GaussianParam::from_vector(order, down))) /
                   (2.0 * h);
    }
    const double scale = std::max(1.0, analytic.lpNorm<Eigen::Infinity>());
    worst = std::max(worst, (analytic - numeric).lpNorm<Eigen::Infinity>() / scale);
  }
  return worst;
}

CoincidenceReport gaussian_coincidence_check(Eigen::Index n, double rho, std::span<const Point> points,
                                             const EstimationConfig& config, std::size_t R, std::uint64_t seed,
                                             double tolerance) {
  CoincidenceReport report;
  report.rho = rho;
  report.tolerance = tolerance;
  const auto ensembles = replicate_ensembles(GaussianWnParams{rho}, R, n, config, points, seed);
  report.pass = true;
  for (const auto& e : ensembles) {
    const ConfidenceBands local = pointwise_bands(e.local);
    const ConfidenceBands global = pointwise_bands(e.global);
    const Eigen::Index N = local.co.median.size();
    CoincidencePoint p;
    p.point = e.point;
    p.flagged = e.local.flagged_count();
    p.max_gap = (local.co.median - global.co.median).cwiseAbs().maxCoeff();
    Eigen::Index co_in = 0, quad_in = 0, phase_in = 0, wider = 0;
    for (Eigen::Index j = 0; j < N; ++j) {
      co_in += (local.co.lower[j] <= rho && rho <= local.co.upper[j]) ? 1 : 0;
      quad_in += (local.quad.lower[j] <= 0.0 && 0.0 <= local.quad.upper[j]) ? 1 : 0;
      phase_in += (local.phase.lower[j] <= 0.0 && 0.0 <= local.phase.upper[j]) ? 1 : 0;
      wider += (local.co.width()[j] > global.co.width()[j]) ? 1 : 0;
    }
    const double denom = static_cast<double>(N);
    p.coverage_co = co_in / denom;
    p.coverage_quad = quad_in / denom;
    p.coverage_phase = phase_in / denom;
    p.wider_fraction = wider / denom;
    p.pass = p.max_gap <= tolerance;
    report.pass = report.pass && p.pass;
    report.points.push_back(p);
  }
  return report;
}

RateReport clt_rate_diagnostic(const ModelSpec& model, Point v, int h, ApproxOrder order, const Bandwidth& b,
                               std::span<const Eigen::Index> sizes, std::size_t R, std::uint64_t seed) {
  if (sizes.size() < 3) throw std::invalid_argument("rate diagnostic needs at least three sample sizes");
  const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
  if (*lo < 1 || *hi < 10 * *lo) throw std::invalid_argument("rate diagnostic sample sizes must span a decade");
  if (R < 3) throw std::invalid_argument("rate diagnostic needs R >= 3");
  RateReport report;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    const Eigen::Index n = sizes[s];
    std::vector<double> rho(R, std::numeric_limits<double>::quiet_NaN());
    parallel_for(R, [&](std::size_t r) {
      const PseudoNormalizedSeries z = pseudo_normalize(simulate(model, n, derive_seed(seed, 2 + s, r)));
      const LagPairSet pairs = lag_pairs(z.column(0), z.column(1), h);
      try {
        const FitResult fit = fit_local_gaussian(pairs, v, b, order);
        if (fit.converged) rho[r] = fit.theta.rho;
      } catch (const DegenerateWeights&) {
      }
    });
    std::vector<double> ok;
    for (double x : rho) {
      if (std::isfinite(x)) ok.push_back(x);
    }
    if (ok.size() < 3) throw std::runtime_error("too few converged fits for the rate diagnostic");
    double mean = 0.0;
    for (double x : ok) mean += x;
    mean /= static_cast<double>(ok.size());
    double var = 0.0;
    for (double x : ok) var += (x - mean) * (x - mean);
    var /= static_cast<double>(ok.size() - 1);
    report.rows.push_back({n, var, ok.size()});
  }

  const auto k = static_cast<double>(report.rows.size());
  double mx = 0.0, my = 0.0;
  for (const auto& row : report.rows) {
    mx += std::log(static_cast<double>(row.n));
    my += std::log(row.variance);
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0, noise = 0.0;
  for (const auto& row : report.rows) {
    const double dx = std::log(static_cast<double>(row.n)) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(row.variance) - my);
    // Var(log s^2) is about 2 / (R - 1) for roughly normal estimates.
    noise += dx * dx * 2.0 / static_cast<double>(row.used - 1);
  }
  report.slope = sxy / sxx;
  report.slope_stderr = std::sqrt(noise) / sxx;
  return report;
}

double phase_amplitude_spread_ratio(const BandEnsemble& ensemble, double omega) {
  const ComplexSummary s = complex_summary_at_frequency(ensemble, omega);
  const double amp_spread = s.modulus.upper - s.modulus.lower;
  const double phase_spread = s.argument.upper - s.argument.lower;
  if (!(amp_spread > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return phase_spread * s.modulus.median / amp_spread;
}

}  // namespace lgspec
