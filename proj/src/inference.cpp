#include "lgspec/inference.hpp"

#include "lgspec/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace lgspec {

PointEstimate estimate_point(const PseudoNormalizedSeries& z, const EstimationConfig& config, Point v) {
  if (config.k < 0 || config.l < 0 || config.k >= z.dims() || config.l >= z.dims()) {
    throw std::invalid_argument("column pair out of range");
  }
  PointEstimate est;
  est.point = v;
  const auto zk = z.column(config.k);
  const auto zl = z.column(config.l);
  try {
    est.local = local_cross_correlations(zk, zl, v, config.bandwidth, config.truncation, config.order, config.fit);
  } catch (const DegenerateWeights&) {
    const int m = config.truncation;
    est.degenerate = true;
    est.local.point = v;
    est.local.bandwidth = config.bandwidth;
    est.local.order = config.order;
    est.local.rho.forward = Eigen::VectorXd::Zero(m + 1);
    est.local.rho.reflected = Eigen::VectorXd::Zero(m);
    est.local.forward_status.assign(static_cast<std::size_t>(m + 1), {false, false, 0});
    est.local.reflected_status.assign(static_cast<std::size_t>(m), {false, false, 0});
  }
  est.global = global_cross_correlations(zk, zl, config.truncation);
  return est;
}

SpectrumEstimate local_spectrum(const PointEstimate& est, const EstimationConfig& config) {
  SpectrumEstimate s = local_cross_spectrum(est.local, config.window, config.grid);
  s.config.k = config.k;
  s.config.l = config.l;
  return s;
}

SpectrumEstimate global_spectrum(const PointEstimate& est, const EstimationConfig& config) {
  SpectrumConfig cfg;
  cfg.point = est.point;
  cfg.bandwidth = config.bandwidth;
  cfg.order = config.order;
  cfg.kind = SpectrumKind::global;
  cfg.k = config.k;
  cfg.l = config.l;
  return make_spectrum(est.global, config.window, config.grid, cfg);
}

std::size_t BandEnsemble::flagged_count() const {
  return static_cast<std::size_t>(std::count(flagged.begin(), flagged.end(), true));
}

PointEnsemble assemble_ensemble(Point point, std::vector<PointEstimate> estimates, const EstimationConfig& config,
                                EnsembleSource source, std::uint64_t seed) {
  PointEnsemble out;
  out.point = point;
  out.local.source = out.global.source = source;
  out.local.seed = out.global.seed = seed;
  for (const auto& est : estimates) {
    out.local.replicates.push_back(local_spectrum(est, config));
    out.local.flagged.push_back(est.degenerate || !est.local.all_converged());
    out.global.replicates.push_back(global_spectrum(est, config));
    out.global.flagged.push_back(false);
  }
  out.estimates = std::move(estimates);
  return out;
}

namespace {

template <typename SeriesAt>
std::vector<PointEnsemble> run_ensembles(std::size_t R, const EstimationConfig& config, std::span<const Point> points,
                                         std::uint64_t seed, EnsembleSource source, SeriesAt&& series_at,
                                         const ProgressFn& progress) {
  if (R < 2) throw std::invalid_argument("an ensemble needs R >= 2 replicates");
  std::vector<std::vector<PointEstimate>> per_replicate(R);
  std::atomic<std::size_t> done{0};
  parallel_for(R, [&](std::size_t r) {
    const PseudoNormalizedSeries z = series_at(r);
    auto& slot = per_replicate[r];
    slot.reserve(points.size());
    for (const Point& v : points) slot.push_back(estimate_point(z, config, v));
    const std::size_t d = ++done;
    if (progress) progress(d, R);
  });

  std::vector<PointEnsemble> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::vector<PointEstimate> estimates;
    estimates.reserve(R);
    for (std::size_t r = 0; r < R; ++r) estimates.push_back(std::move(per_replicate[r][i]));
    out.push_back(assemble_ensemble(points[i], std::move(estimates), config, source, seed));
  }
  return out;
}

}  // namespace

std::vector<PointEnsemble> replicate_ensembles(const ModelSpec& model, std::size_t R, Eigen::Index n,
                                               const EstimationConfig& config, std::span<const Point> points,
                                               std::uint64_t seed, const ProgressFn& progress) {
  return run_ensembles(
      R, config, points, seed, EnsembleSource::model,
      [&](std::size_t r) { return pseudo_normalize(simulate(model, n, derive_seed(seed, 0, r))); }, progress);
}

PointEnsemble replicate_ensemble(const ModelSpec& model, std::size_t R, Eigen::Index n,
                                 const EstimationConfig& config, std::uint64_t seed) {
  const Point v = config.point;
  return std::move(replicate_ensembles(model, R, n, config, std::span<const Point>(&v, 1), seed).front());
}

namespace {

PseudoNormalizedSeries resample_blocks(const PseudoNormalizedSeries& series, Eigen::Index L, std::uint64_t seed) {
  const Eigen::Index n = series.size();
  Engine rng(seed);
  std::uniform_int_distribution<Eigen::Index> start(0, n - 1);
  PseudoNormalizedSeries out;
  out.names = series.names;
  out.rank_method = series.rank_method;
  out.values.resize(n, series.dims());
  Eigen::Index filled = 0;
  while (filled < n) {
    const Eigen::Index s = start(rng);
    for (Eigen::Index j = 0; j < L && filled < n; ++j, ++filled) out.values.row(filled) = series.values.row((s + j) % n);
  }
  return out;
}

}  // namespace

std::vector<PseudoNormalizedSeries> block_bootstrap(const PseudoNormalizedSeries& series, Eigen::Index block_length,
                                                    std::size_t R, std::uint64_t seed) {
  if (block_length < 1 || block_length > series.size()) {
    throw std::invalid_argument("block length must satisfy 1 <= L <= n");
  }
  std::vector<PseudoNormalizedSeries> out;
  out.reserve(R);
  for (std::size_t r = 0; r < R; ++r) out.push_back(resample_blocks(series, block_length, derive_seed(seed, 1, r)));
  return out;
}

std::vector<PointEnsemble> bootstrap_ensembles(const PseudoNormalizedSeries& series, Eigen::Index block_length,
                                               std::size_t R, const EstimationConfig& config,
                                               std::span<const Point> points, std::uint64_t seed,
                                               const ProgressFn& progress) {
  if (block_length < 1 || block_length > series.size()) {
    throw std::invalid_argument("block length must satisfy 1 <= L <= n");
  }
  return run_ensembles(
      R, config, points, seed, EnsembleSource::bootstrap,
      [&](std::size_t r) { return resample_blocks(series, block_length, derive_seed(seed, 1, r)); }, progress);
}

double order_statistic(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("order statistic of an empty sample");
  const double R = static_cast<double>(sorted.size());
  auto k = static_cast<std::size_t>(std::ceil(p * R - 1e-9));
  k = std::clamp<std::size_t>(k, 1, sorted.size());
  return sorted[k - 1];
}

double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(a, two_pi);  // in [-pi, pi]
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

AngleQuantiles circular_quantiles(std::span<const double> angles, double lower_prob, double upper_prob) {
  if (angles.empty()) throw std::invalid_argument("circular quantiles of an empty sample");
  std::size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < angles.size(); ++c) {
    double cost = 0.0;
    for (double a : angles) cost += std::abs(wrap_angle(a - angles[c]));
    if (cost < best_cost) {
      best_cost = cost;
      best = c;
    }
  }
  const double centre = angles[best];
  std::vector<double> rel(angles.size());
  for (std::size_t i = 0; i < angles.size(); ++i) rel[i] = wrap_angle(angles[i] - centre);
  std::sort(rel.begin(), rel.end());

  AngleQuantiles q;
  const double med = centre + order_statistic(rel, 0.5);
  const double shift = wrap_angle(med) - med;
  q.median = med + shift;
  q.lower = centre + order_statistic(rel, lower_prob) + shift;
  q.upper = centre + order_statistic(rel, upper_prob) + shift;
  q.branch_cut = q.lower < -std::numbers::pi || q.upper > std::numbers::pi;
  return q;
}

namespace {

void check_probs(double lower_prob, double upper_prob) {
  if (!(lower_prob > 0.0 && lower_prob < upper_prob && upper_prob < 1.0)) {
    throw std::invalid_argument("band probabilities must satisfy 0 < lower < upper < 1");
  }
}

std::vector<std::size_t> usable(const BandEnsemble& ensemble) {
  std::vector<std::size_t> idx;
  for (std::size_t r = 0; r < ensemble.replicates.size(); ++r) {
    if (r >= ensemble.flagged.size() || !ensemble.flagged[r]) idx.push_back(r);
  }
  if (idx.size() < 2) throw std::invalid_argument("bands need at least 2 unflagged replicates");
  return idx;
}

Band linear_band(const BandEnsemble& e, const std::vector<std::size_t>& idx, Eigen::VectorXd SpectrumEstimate::*curve,
                 double lo, double hi) {
  const Eigen::Index n = e.replicates[idx.front()].grid.size();
  Band b{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  std::vector<double> column(idx.size());
  for (Eigen::Index j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < idx.size(); ++i) column[i] = (e.replicates[idx[i]].*curve)[j];
    std::sort(column.begin(), column.end());
    b.median[j] = order_statistic(column, 0.5);
    b.lower[j] = order_statistic(column, lo);
    b.upper[j] = order_statistic(column, hi);
  }
  return b;
}

}  // namespace

ConfidenceBands pointwise_bands(const BandEnsemble& ensemble, double lower_prob, double upper_prob) {
  check_probs(lower_prob, upper_prob);
  const auto idx = usable(ensemble);
  const Eigen::Index n = ensemble.replicates[idx.front()].grid.size();
  for (std::size_t r : idx) {
    if (ensemble.replicates[r].grid.size() != n) throw std::invalid_argument("replicates do not share a grid");
  }

  ConfidenceBands bands;
  bands.lower_prob = lower_prob;
  bands.upper_prob = upper_prob;
  bands.used = idx.size();
  bands.excluded = ensemble.replicates.size() - idx.size();
  bands.co = linear_band(ensemble, idx, &SpectrumEstimate::co, lower_prob, upper_prob);
  bands.quad = linear_band(ensemble, idx, &SpectrumEstimate::quad, lower_prob, upper_prob);
  bands.amplitude = linear_band(ensemble, idx, &SpectrumEstimate::amplitude, lower_prob, upper_prob);

  bands.phase = Band{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  bands.branch_cut.assign(static_cast<std::size_t>(n), false);
  std::vector<double> column(idx.size());
  for (Eigen::Index j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < idx.size(); ++i) column[i] = ensemble.replicates[idx[i]].phase[j];
    const AngleQuantiles q = circular_quantiles(column, lower_prob, upper_prob);
    bands.phase.median[j] = q.median;
    bands.phase.lower[j] = q.lower;
    bands.phase.upper[j] = q.upper;
    bands.branch_cut[static_cast<std::size_t>(j)] = q.branch_cut;
  }
  return bands;
}

ComplexSummary complex_summary_at_frequency(const BandEnsemble& ensemble, double omega, double lower_prob,
                                            double upper_prob) {
  check_probs(lower_prob, upper_prob);
  const auto idx = usable(ensemble);
  const Eigen::Index j = ensemble.replicates[idx.front()].grid.find(omega);
  if (j < 0) throw std::invalid_argument("frequency is not on the ensemble grid");

  ComplexSummary s;
  s.omega = ensemble.replicates[idx.front()].grid[j];
  s.points.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) s.points[static_cast<Eigen::Index>(i)] = ensemble.replicates[idx[i]].values[j];

  auto triple = [&](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return QuantileTriple{order_statistic(v, lower_prob), order_statistic(v, 0.5), order_statistic(v, upper_prob)};
  };
  std::vector<double> re, im, mod, arg;
  for (const auto& z : s.points) {
    re.push_back(z.real());
    im.push_back(z.imag());
    mod.push_back(std::abs(z));
    arg.push_back(principal_arg(z));
  }
  s.real = triple(re);
  s.imag = triple(im);
  s.modulus = triple(mod);
  const AngleQuantiles q = circular_quantiles(arg, lower_prob, upper_prob);
  s.argument = {q.lower, q.median, q.upper};
  s.branch_cut = q.branch_cut;
  return s;
}

}  // namespace lgspec
