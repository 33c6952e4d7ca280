#include "lgspec/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace lgspec {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  return mix64(mix64(mix64(master) ^ stream) ^ index);
}

void LocalTrigParams::validate() const {
  const std::size_t r = levels.size();
  if (r < 1) throw std::invalid_argument("local trigonometric model needs r >= 1 components");
  if (amplitude.size() != r || amplitude_alt.size() != r || alpha.size() != r || theta.size() != r ||
      prob.size() != r) {
    throw std::invalid_argument("local trigonometric parameter vectors differ in length");
  }
  for (double a : alpha) {
    if (!(a > 0.0 && a < 0.5)) throw std::invalid_argument("component frequencies must lie in (0, 1/2)");
  }
  for (double p : prob) {
    if (!(p >= 0.0)) throw std::invalid_argument("component probabilities must be non-negative");
  }
  const double total = std::accumulate(prob.begin(), prob.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("component probabilities must sum to 1");
}

namespace {

LocalTrigParams base_components() {
  LocalTrigParams p;
  p.levels = {-2.0, -1.0, 0.0, 1.0};
  p.amplitude = {1.0, 0.5, 0.3, 0.5};
  p.amplitude_alt = {0.5, 0.2, 0.2, 0.6};
  p.alpha = {0.267, 0.091, 0.431, 0.270};
  // Printed as (0.05, 0.28, 0.33, 0.33) after rounding.
  p.prob = {0.05, 17.0 / 60.0, 1.0 / 3.0, 1.0 / 3.0};
  return p;
}

}  // namespace

LocalTrigParams LocalTrigParams::common_phase() {
  LocalTrigParams p = base_components();
  p.theta.assign(4, std::numbers::pi / 3.0);
  return p;
}

LocalTrigParams LocalTrigParams::individual_phases() {
  LocalTrigParams p = base_components();
  p.theta = {std::numbers::pi / 3.0, std::numbers::pi / 4.0, 0.0, std::numbers::pi / 2.0};
  return p;
}

std::string model_name(const ModelSpec& model) {
  struct {
    std::string operator()(const GaussianWnParams&) const { return "gaussian-wn"; }
    std::string operator()(const CosineParams&) const { return "cosine"; }
    std::string operator()(const LocalTrigParams&) const { return "local-trig"; }
    std::string operator()(const FixedSeries&) const { return "fixed"; }
  } visitor;
  return std::visit(visitor, model);
}

namespace {

MultivariateSeries bivariate(Eigen::Index n, std::string source) {
  MultivariateSeries s;
  s.names = {"Y1", "Y2"};
  s.values.resize(n, 2);
  s.source = std::move(source);
  return s;
}

}  // namespace

MultivariateSeries gaussian_wn(Eigen::Index n, double rho, std::uint64_t seed) {
  if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("gaussian_wn: |rho| must be < 1");
  if (n < 1) throw std::invalid_argument("gaussian_wn: n must be positive");
  Engine rng(seed);
  std::normal_distribution<double> normal;
  const double c = std::sqrt(1.0 - rho * rho);
  MultivariateSeries s = bivariate(n, "gaussian-wn");
  for (Eigen::Index t = 0; t < n; ++t) {
    const double a = normal(rng);
    const double b = normal(rng);
    s.values(t, 0) = a;
    s.values(t, 1) = rho * a + c * b;
  }
  return s;
}

MultivariateSeries bivariate_cosine(Eigen::Index n, const CosineParams& params, std::uint64_t seed) {
  if (!(params.sigma >= 0.0)) throw std::invalid_argument("bivariate_cosine: sigma must be >= 0");
  if (!(params.alpha > 0.0 && params.alpha < 0.5)) throw std::invalid_argument("bivariate_cosine: alpha must lie in (0, 1/2)");
  Engine rng(seed);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double phi = phase_dist(rng);
  MultivariateSeries s = bivariate(n, "cosine");
  for (Eigen::Index t = 0; t < n; ++t) {
    const double arg = 2.0 * std::numbers::pi * params.alpha * static_cast<double>(t + 1) + phi;
    const double w = params.sigma * noise(rng);
    s.values(t, 0) = std::cos(arg) + w;
    s.values(t, 1) = std::cos(arg + params.theta) + w;
  }
  return s;
}

MultivariateSeries local_trigonometric(Eigen::Index n, const LocalTrigParams& params, std::uint64_t seed,
                                       std::vector<int>& regimes) {
  params.validate();
  Engine rng(seed);
  const std::size_t r = params.components();
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
  std::vector<double> phi(r);
  for (auto& p : phi) p = phase_dist(rng);
  std::discrete_distribution<int> pick(params.prob.begin(), params.prob.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  MultivariateSeries s = bivariate(n, "local-trig");
  regimes.assign(static_cast<std::size_t>(n), 0);
  for (Eigen::Index t = 0; t < n; ++t) {
    const int i = pick(rng);
    const double lo = std::min(params.amplitude[i], params.amplitude_alt[i]);
    const double hi = std::max(params.amplitude[i], params.amplitude_alt[i]);
    const double amp = lo + (hi - lo) * unit(rng);
    const double arg = 2.0 * std::numbers::pi * params.alpha[i] * static_cast<double>(t + 1) + phi[i];
    s.values(t, 0) = params.levels[i] + amp * std::cos(arg);
    s.values(t, 1) = params.levels[i] + amp * std::cos(arg + params.theta[i]);
    regimes[static_cast<std::size_t>(t)] = i;
  }
  return s;
}

MultivariateSeries local_trigonometric(Eigen::Index n, const LocalTrigParams& params, std::uint64_t seed) {
  std::vector<int> regimes;
  return local_trigonometric(n, params, seed, regimes);
}

MultivariateSeries simulate(const ModelSpec& model, Eigen::Index n, std::uint64_t seed) {
  struct {
    Eigen::Index n;
    std::uint64_t seed;
    MultivariateSeries operator()(const GaussianWnParams& p) const { return gaussian_wn(n, p.rho, seed); }
    MultivariateSeries operator()(const CosineParams& p) const { return bivariate_cosine(n, p, seed); }
    MultivariateSeries operator()(const LocalTrigParams& p) const { return local_trigonometric(n, p, seed); }
    MultivariateSeries operator()(const FixedSeries& p) const { return p.data; }
  } visitor{n, seed};
  return std::visit(visitor, model);
}

}  // namespace lgspec
