#include "lgspec/local_gaussian.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/AutoDiff>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lgspec {

void validate(const Bandwidth& b) {
  if (!(b.b1 > 0.0 && b.b2 > 0.0) || !std::isfinite(b.b1) || !std::isfinite(b.b2)) {
    throw std::invalid_argument("bandwidth components must be positive and finite");
  }
}

Eigen::VectorXd GaussianParam::to_vector() const {
  if (order == ApproxOrder::one) return Eigen::VectorXd::Constant(1, rho);
  Eigen::VectorXd theta(5);
  theta << mu1, mu2, sigma1, sigma2, rho;
  return theta;
}

GaussianParam GaussianParam::from_vector(ApproxOrder order, const Eigen::Ref<const Eigen::VectorXd>& theta) {
  if (theta.size() != parameter_count(order)) throw std::invalid_argument("parameter vector has wrong length");
  GaussianParam g;
  g.order = order;
  if (order == ApproxOrder::one) {
    g.rho = theta(0);
  } else {
    g.mu1 = theta(0);
    g.mu2 = theta(1);
    g.sigma1 = theta(2);
    g.sigma2 = theta(3);
    g.rho = theta(4);
  }
  return g;
}

GaussianParam GaussianParam::swapped() const {
  GaussianParam g = *this;
  std::swap(g.mu1, g.mu2);
  std::swap(g.sigma1, g.sigma2);
  return g;
}

bool GaussianParam::valid() const {
  return sigma1 > 0.0 && sigma2 > 0.0 && std::abs(rho) < 1.0 && std::isfinite(mu1) && std::isfinite(mu2);
}

double kernel_weight(const Eigen::Vector2d& w, Point v, const Bandwidth& b) {
  const double u1 = (w(0) - v.v1) / b.b1;
  const double u2 = (w(1) - v.v2) / b.b2;
  return std::exp(-0.5 * (u1 * u1 + u2 * u2)) / (2.0 * std::numbers::pi * b.b1 * b.b2);
}

WeightedMoments weighted_moments(const LagPairSet& pairs, Point v, const Bandwidth& b) {
  validate(b);
  WeightedMoments m;
  m.count = static_cast<double>(pairs.size());
  for (Eigen::Index t = 0; t < pairs.size(); ++t) {
    const Eigen::Vector2d x = pairs.pairs.row(t).transpose();
    const double w = kernel_weight(x, v, b);
    m.weight += w;
    m.first += w * x;
    m.second += w * x * x.transpose();
  }
  return m;
}

namespace {

void require_valid(const GaussianParam& theta) {
  if (!theta.valid()) throw std::invalid_argument("Gaussian parameters outside the admissible set (|rho| < 1, sigma > 0)");
}

}  // namespace

double penalty(const WeightedMoments& m, Point v, const Bandwidth& b, const GaussianParam& theta) {
  validate(b);
  require_valid(theta);
  return detail::penalty<double>(m, v, b, theta.order, theta.to_vector());
}

double penalty(const LagPairSet& pairs, Point v, const Bandwidth& b, const GaussianParam& theta) {
  return penalty(weighted_moments(pairs, v, b), v, b, theta);
}

Eigen::VectorXd penalty_gradient(const WeightedMoments& m, Point v, const Bandwidth& b, const GaussianParam& theta) {
  validate(b);
  require_valid(theta);
  return detail::penalty_gradient<double>(m, v, b, theta.order, theta.to_vector());
}

Eigen::VectorXd penalty_gradient(const LagPairSet& pairs, Point v, const Bandwidth& b, const GaussianParam& theta) {
  return penalty_gradient(weighted_moments(pairs, v, b), v, b, theta);
}

Eigen::MatrixXd penalty_hessian(const WeightedMoments& m, Point v, const Bandwidth& b, const GaussianParam& theta) {
  using AD = Eigen::AutoDiffScalar<Eigen::VectorXd>;
  require_valid(theta);
  const int p = parameter_count(theta.order);
  const Eigen::VectorXd x = theta.to_vector();
  Eigen::Matrix<AD, Eigen::Dynamic, 1> ad(p);
  for (int i = 0; i < p; ++i) ad(i) = AD(x(i), p, i);
  const auto grad = detail::penalty_gradient<AD>(m, v, b, theta.order, ad);
  Eigen::MatrixXd h(p, p);
  for (int i = 0; i < p; ++i) {
    const Eigen::VectorXd& d = grad(i).derivatives();
    if (d.size() == p) {
      h.row(i) = d.transpose();
    } else {
      h.row(i).setZero();
    }
  }
  return 0.5 * (h + h.transpose());
}

GaussianParam initial_guess(const WeightedMoments& m, ApproxOrder order) {
  GaussianParam g;
  g.order = order;
  if (!(m.weight > 0.0)) return g;
  const Eigen::Vector2d mean = m.first / m.weight;
  const Eigen::Matrix2d cov = m.second / m.weight - mean * mean.transpose();
  const double s1 = std::sqrt(std::max(cov(0, 0), 1e-12));
  const double s2 = std::sqrt(std::max(cov(1, 1), 1e-12));
  g.rho = std::clamp(cov(0, 1) / (s1 * s2), -0.95, 0.95);
  if (order == ApproxOrder::five) {
    g.mu1 = mean(0);
    g.mu2 = mean(1);
    g.sigma1 = s1;
    g.sigma2 = s2;
  }
  return g;
}

namespace {

bool feasible(const Eigen::VectorXd& theta, ApproxOrder order, double rho_bound) {
  if (!theta.allFinite()) return false;
  if (order == ApproxOrder::one) return std::abs(theta(0)) <= rho_bound;
  return theta(2) > 0.0 && theta(3) > 0.0 && std::abs(theta(4)) <= rho_bound;
}

void clamp_rho(Eigen::VectorXd& theta, ApproxOrder order, double rho_bound) {
  const Eigen::Index r = order == ApproxOrder::one ? 0 : 4;
  theta(r) = std::clamp(theta(r), -rho_bound, rho_bound);
}

Eigen::VectorXd descent_direction(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& grad) {
  Eigen::LLT<Eigen::MatrixXd> llt(hessian);
  if (llt.info() == Eigen::Success) {
    Eigen::VectorXd d = -llt.solve(grad);
    if (d.allFinite() && grad.dot(d) < 0.0) return d;
  }
  // Shift the spectrum until positive definite; large shifts approach steepest descent.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hessian);
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  const double shift = std::max(0.0, -eig.eigenvalues().minCoeff()) + 1e-3 * scale;
  const Eigen::MatrixXd shifted =
      hessian + shift * Eigen::MatrixXd::Identity(hessian.rows(), hessian.cols());
  return -shifted.llt().solve(grad);
}

}  // namespace

FitResult fit_local_gaussian(const WeightedMoments& m, Point v, const Bandwidth& b, ApproxOrder order,
                             std::optional<GaussianParam> init, const FitOptions& opts) {
  validate(b);
  const double eff = m.effective_sample(b);
  if (!(eff >= opts.degenerate_sample)) {
    throw DegenerateWeights("all kernel weights vanish at the requested point");
  }

  FitResult result;
  GaussianParam start = init && init->order == order && init->valid() ? *init : initial_guess(m, order);
  result.theta = start;
  if (eff < opts.min_effective_sample) {
    result.attempted = false;
    result.converged = false;
    return result;
  }

  Eigen::VectorXd theta = start.to_vector();
  clamp_rho(theta, order, opts.rho_bound);
  double value = detail::penalty<double>(m, v, b, order, theta);
  Eigen::VectorXd grad = detail::penalty_gradient<double>(m, v, b, order, theta);

  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    if (grad.lpNorm<Eigen::Infinity>() < opts.tolerance) break;
    const Eigen::MatrixXd hessian = penalty_hessian(m, v, b, GaussianParam::from_vector(order, theta));
    const Eigen::VectorXd dir = descent_direction(hessian, grad);
    const double slope = grad.dot(dir);
    // Near the optimum the decrease falls below the rounding noise of the
    // penalty; allow for that in the sufficient-decrease test.
    const double noise = 1e-13 * (1.0 + std::abs(value));

    bool accepted = false;
    double step = 1.0;
    for (int k = 0; k < 40; ++k, step *= 0.5) {
      Eigen::VectorXd trial = theta + step * dir;
      clamp_rho(trial, order, opts.rho_bound);
      if (!feasible(trial, order, opts.rho_bound)) continue;
      const double trial_value = detail::penalty<double>(m, v, b, order, trial);
      if (std::isfinite(trial_value) && trial_value <= value + 1e-4 * step * slope + noise) {
        if ((trial - theta).lpNorm<Eigen::Infinity>() == 0.0) break;
        theta = trial;
        value = trial_value;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    grad = detail::penalty_gradient<double>(m, v, b, order, theta);
  }

  result.theta = GaussianParam::from_vector(order, theta);
  result.iterations = iter;
  result.score_norm = grad.lpNorm<Eigen::Infinity>();
  result.converged = result.score_norm < opts.tolerance;
  return result;
}

FitResult fit_local_gaussian(const LagPairSet& pairs, Point v, const Bandwidth& b, ApproxOrder order,
                             std::optional<GaussianParam> init, const FitOptions& opts) {
  return fit_local_gaussian(weighted_moments(pairs, v, b), v, b, order, init, opts);
}

bool LocalCorrelationSet::all_converged() const { return failed_fits() == 0; }

int LocalCorrelationSet::failed_fits() const {
  int failed = 0;
  for (const auto& s : forward_status) failed += s.converged ? 0 : 1;
  for (const auto& s : reflected_status) failed += s.converged ? 0 : 1;
  return failed;
}

namespace {

struct LagSweep {
  Eigen::VectorXd rho;
  std::vector<LagFitStatus> status;
  std::optional<GaussianParam> first_fit;  // converged fit at h_begin
};

LagSweep sweep_lags(const Eigen::Ref<const Eigen::VectorXd>& first, const Eigen::Ref<const Eigen::VectorXd>& second,
                    PairOrder tag, int h_begin, int h_end, Point v, const Bandwidth& b, ApproxOrder order,
                    std::optional<GaussianParam> warm, const FitOptions& opts) {
  LagSweep out;
  out.rho.resize(h_end - h_begin + 1);
  for (int h = h_begin; h <= h_end; ++h) {
    const LagPairSet pairs = lag_pairs(first, second, h, tag);
    const FitResult fit = fit_local_gaussian(pairs, v, b, order, warm, opts);
    out.rho(h - h_begin) = fit.theta.rho;
    out.status.push_back({fit.converged, fit.attempted, fit.iterations});
    if (h == h_begin && fit.converged) out.first_fit = fit.theta;
    warm = fit.converged ? std::optional<GaussianParam>(fit.theta) : std::nullopt;
  }
  return out;
}

void check_truncation(Eigen::Index n, int m) {
  if (m < 1 || m >= n) throw std::invalid_argument("truncation m must satisfy 1 <= m < n");
}

}  // namespace

LocalCorrelationSet local_cross_correlations(const Eigen::Ref<const Eigen::VectorXd>& zk,
                                             const Eigen::Ref<const Eigen::VectorXd>& zl, Point v,
                                             const Bandwidth& b, int m, ApproxOrder order, const FitOptions& opts) {
  validate(b);
  check_truncation(zk.size(), m);
  LocalCorrelationSet set;
  set.point = v;
  set.bandwidth = b;
  set.order = order;

  const LagSweep fwd = sweep_lags(zk, zl, PairOrder::kl, 0, m, v, b, order, std::nullopt, opts);
  // Lag 0 at v for (k,l) is the swapped problem of lag 0 at reflect(v) for (l,k).
  std::optional<GaussianParam> warm;
  if (fwd.first_fit) warm = fwd.first_fit->swapped();
  const Bandwidth swapped_b{b.b2, b.b1};
  const LagSweep rev = sweep_lags(zl, zk, PairOrder::lk, 1, m, reflect(v), swapped_b, order, warm, opts);

  set.rho.forward = fwd.rho;
  set.rho.reflected = rev.rho;
  set.forward_status = fwd.status;
  set.reflected_status = rev.status;
  return set;
}

LocalCorrelationSet local_auto_correlations(const Eigen::Ref<const Eigen::VectorXd>& z, Point v,
                                            const Bandwidth& b, int m, ApproxOrder order, const FitOptions& opts) {
  validate(b);
  check_truncation(z.size(), m);
  LocalCorrelationSet set;
  set.point = v;
  set.bandwidth = b;
  set.order = order;

  const LagSweep fwd = sweep_lags(z, z, PairOrder::kl, 1, m, v, b, order, std::nullopt, opts);
  const LagSweep rev = sweep_lags(z, z, PairOrder::lk, 1, m, reflect(v), Bandwidth{b.b2, b.b1}, order,
                                  std::nullopt, opts);
  set.rho.forward.resize(m + 1);
  set.rho.forward(0) = 1.0;
  set.rho.forward.tail(m) = fwd.rho;
  set.rho.reflected = rev.rho;
  set.forward_status.push_back({true, false, 0});
  set.forward_status.insert(set.forward_status.end(), fwd.status.begin(), fwd.status.end());
  set.reflected_status = rev.status;
  return set;
}

}  // namespace lgspec
