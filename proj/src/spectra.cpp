#include "lgspec/spectra.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lgspec {

std::string to_string(LagWindow w) {
  switch (w) {
    case LagWindow::tukey_hanning: return "tukey-hanning";
    case LagWindow::bartlett: return "bartlett";
    case LagWindow::parzen: return "parzen";
  }
  return "tukey-hanning";
}

LagWindow lag_window_from_string(const std::string& s) {
  if (s == "tukey-hanning" || s == "tukey_hanning" || s == "tukey") return LagWindow::tukey_hanning;
  if (s == "bartlett") return LagWindow::bartlett;
  if (s == "parzen") return LagWindow::parzen;
  throw std::invalid_argument("unknown lag window '" + s + "'");
}

double tukey_hanning(int h, int m) {
  if (m < 1) throw std::invalid_argument("lag window needs m >= 1");
  if (std::abs(h) > m) return 0.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(h) / m));
}

double lag_window_weight(LagWindow window, int h, int m) {
  if (m < 1) throw std::invalid_argument("lag window needs m >= 1");
  const double u = std::abs(static_cast<double>(h)) / m;
  if (u > 1.0) return 0.0;
  switch (window) {
    case LagWindow::tukey_hanning: return tukey_hanning(h, m);
    case LagWindow::bartlett: return 1.0 - u;
    case LagWindow::parzen:
      return u <= 0.5 ? 1.0 - 6.0 * u * u + 6.0 * u * u * u : 2.0 * std::pow(1.0 - u, 3);
  }
  return 0.0;
}

std::pair<double, double> sincos_two_pi(double x) {
  double r = x - std::round(x);  // in [-1/2, 1/2]
  // Exact values where the result is 0 or +-1.
  const double quarter = r * 4.0;
  if (quarter == std::round(quarter)) {
    switch (static_cast<int>(quarter)) {
      case 0: return {0.0, 1.0};
      case 1: return {1.0, 0.0};
      case -1: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }
  const double angle = 2.0 * std::numbers::pi * r;
  return {std::sin(angle), std::cos(angle)};
}

FrequencyGrid::FrequencyGrid(Eigen::VectorXd values) : values_(std::move(values)) {
  if (values_.size() == 0) throw std::invalid_argument("frequency grid is empty");
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= 0.0 && values_[i] <= 0.5)) throw std::invalid_argument("frequencies must lie in [0, 1/2]");
    if (i > 0 && !(values_[i] > values_[i - 1])) throw std::invalid_argument("frequencies must be strictly increasing");
  }
}

FrequencyGrid FrequencyGrid::uniform(Eigen::Index count) {
  if (count < 2) throw std::invalid_argument("frequency grid needs at least 2 points");
  Eigen::VectorXd v(count);
  for (Eigen::Index j = 0; j < count; ++j) v[j] = 0.5 * (static_cast<double>(j) / static_cast<double>(count - 1));
  return FrequencyGrid(std::move(v));
}

Eigen::Index FrequencyGrid::find(double omega, double tol) const {
  const Eigen::Index j = nearest(omega);
  return std::abs(values_[j] - omega) <= tol ? j : -1;
}

Eigen::Index FrequencyGrid::nearest(double omega) const {
  Eigen::Index best;
  (values_.array() - omega).abs().minCoeff(&best);
  return best;
}

Eigen::VectorXd full_period_frequencies(Eigen::Index count) {
  Eigen::VectorXd v(count);
  for (Eigen::Index j = 0; j < count; ++j) v[j] = static_cast<double>(j) / static_cast<double>(count);
  return v;
}

Eigen::VectorXcd fold_spectrum(const LagCorrelations& rho, LagWindow window,
                               const Eigen::Ref<const Eigen::VectorXd>& omegas) {
  const int m = rho.truncation();
  if (rho.forward.size() != m + 1) throw std::invalid_argument("forward correlations must cover lags 0..m");
  Eigen::VectorXd weights(m + 1);
  for (int h = 1; h <= m; ++h) weights[h] = lag_window_weight(window, h, m);

  Eigen::VectorXcd out(omegas.size());
  for (Eigen::Index j = 0; j < omegas.size(); ++j) {
    double re = rho.forward[0];
    double im = 0.0;
    for (int h = 1; h <= m; ++h) {
      const auto [s, c] = sincos_two_pi(omegas[j] * h);
      const double fwd = rho.forward[h];
      const double refl = rho.reflected[h - 1];
      // refl * e^{+i a} + fwd * e^{-i a}
      re += weights[h] * (refl + fwd) * c;
      im += weights[h] * (refl - fwd) * s;
    }
    out[j] = {re, im};
  }
  return out;
}

LagCorrelations swap_roles(const LagCorrelations& rho) {
  const int m = rho.truncation();
  LagCorrelations out;
  out.forward.resize(m + 1);
  out.forward[0] = rho.forward[0];
  out.forward.tail(m) = rho.reflected;
  out.reflected = rho.forward.tail(m);
  return out;
}

double principal_arg(std::complex<double> z) {
  const double a = std::arg(z);
  return a <= -std::numbers::pi ? std::numbers::pi : a;
}

SpectrumEstimate make_spectrum(const LagCorrelations& rho, LagWindow window, const FrequencyGrid& grid,
                               const SpectrumConfig& config) {
  SpectrumEstimate s;
  s.grid = grid;
  s.config = config;
  s.config.window = window;
  s.config.truncation = rho.truncation();
  s.values = fold_spectrum(rho, window, grid.values());
  const Eigen::Index n = grid.size();
  s.co = s.values.real();
  s.quad = -s.values.imag();
  s.amplitude.resize(n);
  s.phase.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    s.amplitude[j] = std::abs(s.values[j]);
    s.phase[j] = principal_arg(s.values[j]);
  }
  return s;
}

SpectrumEstimate local_cross_spectrum(const LocalCorrelationSet& corrs, LagWindow window, const FrequencyGrid& grid) {
  if (corrs.rho.forward.size() != corrs.rho.reflected.size() + 1 || corrs.rho.reflected.size() < 1) {
    throw std::invalid_argument("correlation set is missing lags");
  }
  SpectrumConfig cfg;
  cfg.point = corrs.point;
  cfg.bandwidth = corrs.bandwidth;
  cfg.order = corrs.order;
  cfg.kind = SpectrumKind::local;
  return make_spectrum(corrs.rho, window, grid, cfg);
}

SpectrumEstimate local_auto_spectrum(const Eigen::Ref<const Eigen::VectorXd>& z, Point v, const Bandwidth& b, int m,
                                     ApproxOrder order, LagWindow window, const FrequencyGrid& grid) {
  const LocalCorrelationSet corrs = local_auto_correlations(z, v, b, m, order);
  SpectrumEstimate s = local_cross_spectrum(corrs, window, grid);
  s.config.l = s.config.k;
  return s;
}

namespace {

double pearson(const LagPairSet& pairs) {
  const auto x = pairs.pairs.col(0).array();
  const auto y = pairs.pairs.col(1).array();
  const double mx = x.mean();
  const double my = y.mean();
  const double sxy = ((x - mx) * (y - my)).sum();
  const double sxx = (x - mx).square().sum();
  const double syy = (y - my).square().sum();
  if (!(sxx > 0.0 && syy > 0.0)) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

LagCorrelations global_cross_correlations(const Eigen::Ref<const Eigen::VectorXd>& zk,
                                          const Eigen::Ref<const Eigen::VectorXd>& zl, int m) {
  if (m < 1 || m >= zk.size()) throw std::invalid_argument("truncation m must satisfy 1 <= m < n");
  LagCorrelations rho;
  rho.forward.resize(m + 1);
  rho.reflected.resize(m);
  for (int h = 0; h <= m; ++h) rho.forward[h] = pearson(lag_pairs(zk, zl, h));
  for (int h = 1; h <= m; ++h) rho.reflected[h - 1] = pearson(lag_pairs(zl, zk, h, PairOrder::lk));
  return rho;
}

SpectrumEstimate global_cross_spectrum(const Eigen::Ref<const Eigen::VectorXd>& zk,
                                       const Eigen::Ref<const Eigen::VectorXd>& zl, int m, LagWindow window,
                                       const FrequencyGrid& grid) {
  SpectrumConfig cfg;
  cfg.kind = SpectrumKind::global;
  return make_spectrum(global_cross_correlations(zk, zl, m), window, grid, cfg);
}

bool conjugate_fold_check(const LagCorrelations& rho, LagWindow window, const FrequencyGrid& grid, double tol) {
  const Eigen::VectorXcd f = fold_spectrum(rho, window, grid.values());
  const Eigen::VectorXcd g = fold_spectrum(swap_roles(rho), window, grid.values());
  return (f - g.conjugate()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace lgspec
