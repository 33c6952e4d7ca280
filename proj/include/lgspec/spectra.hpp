#pragma once

#include "lgspec/local_gaussian.hpp"

#include <Eigen/Core>

#include <complex>
#include <string>
#include <utility>

namespace lgspec {

enum class LagWindow { tukey_hanning, bartlett, parzen };

std::string to_string(LagWindow w);
LagWindow lag_window_from_string(const std::string& s);

/// 1/2 (1 + cos(pi h / m)) for |h| <= m, zero beyond.
double tukey_hanning(int h, int m);
double lag_window_weight(LagWindow window, int h, int m);

/// (sin(2 pi x), cos(2 pi x)) with exact values at multiples of 1/4.
std::pair<double, double> sincos_two_pi(double x);

/// Increasing display frequencies inside [0, 1/2].
class FrequencyGrid {
 public:
  FrequencyGrid() : FrequencyGrid(uniform(1024)) {}
  explicit FrequencyGrid(Eigen::VectorXd values);

  /// count equispaced points on [0, 1/2], both endpoints included.
  static FrequencyGrid uniform(Eigen::Index count);

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_[i]; }
  /// Index of the grid point within tol of omega, or -1.
  Eigen::Index find(double omega, double tol = 1e-9) const;
  Eigen::Index nearest(double omega) const;

 private:
  Eigen::VectorXd values_;
};

/// Equispaced frequencies j / count, j = 0..count-1, spanning one full period.
Eigen::VectorXd full_period_frequencies(Eigen::Index count);

/// f(w) = rho_fwd(0) + sum_{h=1}^m lambda_m(h) [rho_refl(h) e^{+2 pi i w h} + rho_fwd(h) e^{-2 pi i w h}].
Eigen::VectorXcd fold_spectrum(const LagCorrelations& rho, LagWindow window,
                               const Eigen::Ref<const Eigen::VectorXd>& omegas);

/// Correlations of the (l,k) pair at reflect(v), rebuilt from those of (k,l) at v.
LagCorrelations swap_roles(const LagCorrelations& rho);

enum class SpectrumKind { local, global };

struct SpectrumConfig {
  Point point;
  Bandwidth bandwidth;
  int truncation = 10;
  ApproxOrder order = ApproxOrder::five;
  LagWindow window = LagWindow::tukey_hanning;
  SpectrumKind kind = SpectrumKind::local;
  int k = 0;
  int l = 1;
};

struct SpectrumEstimate {
  FrequencyGrid grid;
  Eigen::VectorXcd values;
  Eigen::VectorXd co;
  Eigen::VectorXd quad;
  Eigen::VectorXd amplitude;
  Eigen::VectorXd phase;  // in (-pi, pi]
  SpectrumConfig config;
};

/// Phase in (-pi, pi].
double principal_arg(std::complex<double> z);

SpectrumEstimate make_spectrum(const LagCorrelations& rho, LagWindow window, const FrequencyGrid& grid,
                               const SpectrumConfig& config);

SpectrumEstimate local_cross_spectrum(const LocalCorrelationSet& corrs, LagWindow window, const FrequencyGrid& grid);

SpectrumEstimate local_auto_spectrum(const Eigen::Ref<const Eigen::VectorXd>& z, Point v, const Bandwidth& b, int m,
                                     ApproxOrder order, LagWindow window, const FrequencyGrid& grid);

/// Ordinary Pearson lag correlations of (zk_{t+h}, zl_t) for h = 0..m and
/// (zl_{t+h}, zk_t) for h = 1..m.
LagCorrelations global_cross_correlations(const Eigen::Ref<const Eigen::VectorXd>& zk,
                                          const Eigen::Ref<const Eigen::VectorXd>& zl, int m);

SpectrumEstimate global_cross_spectrum(const Eigen::Ref<const Eigen::VectorXd>& zk,
                                       const Eigen::Ref<const Eigen::VectorXd>& zl, int m, LagWindow window,
                                       const FrequencyGrid& grid);

/// Checks f_{kl|v}(w) == conj(f_{lk|reflect(v)}(w)) on the grid to tol.
bool conjugate_fold_check(const LagCorrelations& rho, LagWindow window, const FrequencyGrid& grid,
                          double tol = 1e-12);

}  // namespace lgspec
