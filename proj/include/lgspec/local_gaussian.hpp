#pragma once

#include "lgspec/series.hpp"

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

namespace lgspec {

struct Point {
  double v1 = 0.0;
  double v2 = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Diagonal reflection (v1, v2) -> (v2, v1).
constexpr Point reflect(Point v) { return {v.v2, v.v1}; }

struct Bandwidth {
  double b1 = 0.6;
  double b2 = 0.6;

  friend bool operator==(const Bandwidth&, const Bandwidth&) = default;
};

void validate(const Bandwidth& b);

/// Number of parameters of the local Gaussian approximation.
enum class ApproxOrder { one = 1, five = 5 };

constexpr int parameter_count(ApproxOrder p) { return static_cast<int>(p); }

/// Parameters of psi_p. For p = 1 only rho is free; mu = 0 and sigma = 1.
struct GaussianParam {
  ApproxOrder order = ApproxOrder::five;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double sigma1 = 1.0;
  double sigma2 = 1.0;
  double rho = 0.0;

  Eigen::VectorXd to_vector() const;
  static GaussianParam from_vector(ApproxOrder order, const Eigen::Ref<const Eigen::VectorXd>& theta);
  /// Parameters for the coordinate-swapped pair (y, x).
  GaussianParam swapped() const;
  bool valid() const;
};

/// Thrown when every kernel weight of a pair set is numerically zero.
class DegenerateWeights : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Kernel-weighted sufficient statistics of a pair set at a point. The local
/// penalty depends on the data only through these.
struct WeightedMoments {
  double count = 0.0;                 // number of pairs n
  double weight = 0.0;                // sum_t K_b(X_t - v)
  Eigen::Vector2d first = Eigen::Vector2d::Zero();   // sum_t K_b(X_t - v) X_t
  Eigen::Matrix2d second = Eigen::Matrix2d::Zero();  // sum_t K_b(X_t - v) X_t X_t^T

  /// Sum of weights times b1*b2; comparable to a count of nearby pairs.
  double effective_sample(const Bandwidth& b) const { return weight * b.b1 * b.b2; }
};

/// Gaussian product kernel scaled by the bandwidth:
/// (1 / (b1 b2)) phi((w1 - v1) / b1) phi((w2 - v2) / b2).
double kernel_weight(const Eigen::Vector2d& w, Point v, const Bandwidth& b);

WeightedMoments weighted_moments(const LagPairSet& pairs, Point v, const Bandwidth& b);

namespace detail {

template <typename Scalar>
struct GaussianBlocks {
  Eigen::Matrix<Scalar, 2, 1> mu;
  Scalar s1, s2, rho;
};

template <typename Scalar>
GaussianBlocks<Scalar> unpack(ApproxOrder order, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& theta) {
  if (order == ApproxOrder::one) {
    return {Eigen::Matrix<Scalar, 2, 1>::Zero(), Scalar(1), Scalar(1), theta(0)};
  }
  return {Eigen::Matrix<Scalar, 2, 1>(theta(0), theta(1)), theta(2), theta(3), theta(4)};
}

template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> inverse2(const Eigen::Matrix<Scalar, 2, 2>& a, Scalar& det) {
  det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  Eigen::Matrix<Scalar, 2, 2> inv;
  inv << a(1, 1) / det, -a(0, 1) / det, -a(1, 0) / det, a(0, 0) / det;
  return inv;
}

/// Q(theta) = -sum_t K_b(X_t - v) log psi_p(X_t; theta) + n * int K_b(y - v) psi_p(y; theta) dy.
/// The integral is the N(mu, Sigma + diag(b^2)) density at v.
template <typename Scalar>
Scalar penalty(const WeightedMoments& m, Point v, const Bandwidth& b, ApproxOrder order,
               const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& theta) {
  using std::exp;
  using std::log;
  using std::sqrt;
  const auto g = unpack(order, theta);
  const Scalar c12 = g.rho * g.s1 * g.s2;

  Eigen::Matrix<Scalar, 2, 2> sigma;
  sigma << g.s1 * g.s1, c12, c12, g.s2 * g.s2;
  Scalar det_sigma;
  const Eigen::Matrix<Scalar, 2, 2> sigma_inv = inverse2(sigma, det_sigma);

  const Eigen::Matrix<Scalar, 2, 1> m1 = m.first.cast<Scalar>();
  const Eigen::Matrix<Scalar, 2, 2> centred = m.second.cast<Scalar>() - m1 * g.mu.transpose() -
                                              g.mu * m1.transpose() + Scalar(m.weight) * g.mu * g.mu.transpose();
  const Scalar data = Scalar(m.weight) * (std::log(2.0 * std::numbers::pi) + 0.5 * log(det_sigma)) +
                      0.5 * (sigma_inv * centred).trace();

  Eigen::Matrix<Scalar, 2, 2> smoothed = sigma;
  smoothed(0, 0) += b.b1 * b.b1;
  smoothed(1, 1) += b.b2 * b.b2;
  Scalar det_smoothed;
  const Eigen::Matrix<Scalar, 2, 2> smoothed_inv = inverse2(smoothed, det_smoothed);
  const Eigen::Matrix<Scalar, 2, 1> e = Eigen::Matrix<Scalar, 2, 1>(Scalar(v.v1), Scalar(v.v2)) - g.mu;
  const Scalar quad = e.dot(smoothed_inv * e);
  const Scalar integral = exp(-0.5 * quad) / (2.0 * std::numbers::pi * sqrt(det_smoothed));

  return data + Scalar(m.count) * integral;
}

template <typename Scalar>
Scalar trace_product(const Eigen::Matrix<Scalar, 2, 2>& g, const Eigen::Matrix<Scalar, 2, 2>& a) {
  return g(0, 0) * a(0, 0) + g(0, 1) * a(1, 0) + g(1, 0) * a(0, 1) + g(1, 1) * a(1, 1);
}

/// Analytic gradient of penalty(). Uses the matrix-calculus identities
/// d log|S| = tr(S^{-1} dS) and d tr(S^{-1} C) = -tr(S^{-1} C S^{-1} dS), then
/// the chain rule through Sigma(sigma1, sigma2, rho).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> penalty_gradient(const WeightedMoments& m, Point v, const Bandwidth& b,
                                                          ApproxOrder order,
                                                          const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& theta) {
  using std::exp;
  using std::sqrt;
  using Mat = Eigen::Matrix<Scalar, 2, 2>;
  using Vec = Eigen::Matrix<Scalar, 2, 1>;
  const auto g = unpack(order, theta);
  const Scalar c12 = g.rho * g.s1 * g.s2;

  Mat sigma;
  sigma << g.s1 * g.s1, c12, c12, g.s2 * g.s2;
  Scalar det_sigma;
  const Mat sigma_inv = inverse2(sigma, det_sigma);

  const Vec m1 = m.first.cast<Scalar>();
  const Scalar w = Scalar(m.weight);
  const Mat centred = m.second.cast<Scalar>() - m1 * g.mu.transpose() - g.mu * m1.transpose() +
                      w * g.mu * g.mu.transpose();

  // Data term.
  Vec grad_mu = -(sigma_inv * (m1 - w * g.mu));
  Mat grad_sigma = 0.5 * (w * sigma_inv - sigma_inv * centred * sigma_inv);

  // Integral term: n * N(v; mu, Sigma + B).
  Mat smoothed = sigma;
  smoothed(0, 0) += b.b1 * b.b1;
  smoothed(1, 1) += b.b2 * b.b2;
  Scalar det_smoothed;
  const Mat smoothed_inv = inverse2(smoothed, det_smoothed);
  const Vec e = Vec(Scalar(v.v1), Scalar(v.v2)) - g.mu;
  const Vec se = smoothed_inv * e;
  const Scalar integral =
      Scalar(m.count) * exp(-0.5 * e.dot(se)) / (2.0 * std::numbers::pi * sqrt(det_smoothed));
  grad_mu += integral * se;
  grad_sigma += 0.5 * integral * (se * se.transpose() - smoothed_inv);

  Mat d_rho;
  d_rho << Scalar(0), g.s1 * g.s2, g.s1 * g.s2, Scalar(0);

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(parameter_count(order));
  if (order == ApproxOrder::one) {
    out(0) = trace_product(grad_sigma, d_rho);
    return out;
  }
  Mat d_s1, d_s2;
  d_s1 << 2.0 * g.s1, g.rho * g.s2, g.rho * g.s2, Scalar(0);
  d_s2 << Scalar(0), g.rho * g.s1, g.rho * g.s1, 2.0 * g.s2;
  out(0) = grad_mu(0);
  out(1) = grad_mu(1);
  out(2) = trace_product(grad_sigma, d_s1);
  out(3) = trace_product(grad_sigma, d_s2);
  out(4) = trace_product(grad_sigma, d_rho);
  return out;
}

}  // namespace detail

double penalty(const WeightedMoments& m, Point v, const Bandwidth& b, const GaussianParam& theta);
double penalty(const LagPairSet& pairs, Point v, const Bandwidth& b, const GaussianParam& theta);
Eigen::VectorXd penalty_gradient(const WeightedMoments& m, Point v, const Bandwidth& b, const GaussianParam& theta);
Eigen::VectorXd penalty_gradient(const LagPairSet& pairs, Point v, const Bandwidth& b, const GaussianParam& theta);
/// Exact Hessian, obtained by forward-mode differentiation of the analytic gradient.
Eigen::MatrixXd penalty_hessian(const WeightedMoments& m, Point v, const Bandwidth& b, const GaussianParam& theta);

struct FitOptions {
  double tolerance = 1e-6;     // on the infinity norm of the gradient
  int max_iterations = 50;
  double rho_bound = 0.999;
  double min_effective_sample = 5.0;
  double degenerate_sample = 1e-8;
};

struct FitResult {
  GaussianParam theta;
  bool converged = false;
  bool attempted = true;  // false when below the effective-sample floor
  int iterations = 0;
  double score_norm = 0.0;
};

/// Kernel-weighted means, SDs and Pearson correlation; rho clamped to [-0.95, 0.95].
GaussianParam initial_guess(const WeightedMoments& m, ApproxOrder order);

/// Damped Newton minimisation of the local penalty. Non-convergence is
/// reported through FitResult::converged; only all-zero weights throw.
FitResult fit_local_gaussian(const WeightedMoments& m, Point v, const Bandwidth& b, ApproxOrder order,
                             std::optional<GaussianParam> init = std::nullopt, const FitOptions& opts = {});
FitResult fit_local_gaussian(const LagPairSet& pairs, Point v, const Bandwidth& b, ApproxOrder order,
                             std::optional<GaussianParam> init = std::nullopt, const FitOptions& opts = {});

/// Lag correlations feeding the folded spectrum: forward(h) for h = 0..m and
/// reflected(h - 1) for h = 1..m.
struct LagCorrelations {
  Eigen::VectorXd forward;
  Eigen::VectorXd reflected;

  int truncation() const { return static_cast<int>(reflected.size()); }
};

struct LagFitStatus {
  bool converged = false;
  bool attempted = true;
  int iterations = 0;
};

struct LocalCorrelationSet {
  Point point;
  Bandwidth bandwidth;
  ApproxOrder order = ApproxOrder::five;
  LagCorrelations rho;
  std::vector<LagFitStatus> forward_status;    // h = 0..m
  std::vector<LagFitStatus> reflected_status;  // h = 1..m

  bool all_converged() const;
  int failed_fits() const;
};

/// Fits at v on (zk_{t+h}, zl_t), h = 0..m, and at reflect(v) on
/// (zl_{t+h}, zk_t), h = 1..m, warm-starting each lag from the previous one.
LocalCorrelationSet local_cross_correlations(const Eigen::Ref<const Eigen::VectorXd>& zk,
                                             const Eigen::Ref<const Eigen::VectorXd>& zl, Point v,
                                             const Bandwidth& b, int m, ApproxOrder order,
                                             const FitOptions& opts = {});

/// Auto case: lag 0 fixed to 1, forward lags at v and reflected lags at
/// reflect(v), both on (z_{t+h}, z_t).
LocalCorrelationSet local_auto_correlations(const Eigen::Ref<const Eigen::VectorXd>& z, Point v,
                                            const Bandwidth& b, int m, ApproxOrder order,
                                            const FitOptions& opts = {});

}  // namespace lgspec
