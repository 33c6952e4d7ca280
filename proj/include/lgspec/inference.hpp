#pragma once

#include "lgspec/local_gaussian.hpp"
#include "lgspec/series.hpp"
#include "lgspec/simulate.hpp"
#include "lgspec/spectra.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace lgspec {

struct EstimationConfig {
  Point point;
  Bandwidth bandwidth{0.6, 0.6};
  int truncation = 10;
  ApproxOrder order = ApproxOrder::five;
  LagWindow window = LagWindow::tukey_hanning;
  FrequencyGrid grid = FrequencyGrid::uniform(1024);
  int k = 0;
  int l = 1;
  FitOptions fit;
};

/// Local correlation set and global lag correlations at one point of one series.
struct PointEstimate {
  Point point;
  LocalCorrelationSet local;
  LagCorrelations global;
  bool degenerate = false;  // some lag had all-zero kernel weights
};

PointEstimate estimate_point(const PseudoNormalizedSeries& z, const EstimationConfig& config, Point v);

SpectrumEstimate local_spectrum(const PointEstimate& est, const EstimationConfig& config);
SpectrumEstimate global_spectrum(const PointEstimate& est, const EstimationConfig& config);

enum class EnsembleSource { model, bootstrap };

struct BandEnsemble {
  std::vector<SpectrumEstimate> replicates;
  std::vector<bool> flagged;  // non-converged or degenerate; excluded from quantiles
  EnsembleSource source = EnsembleSource::model;
  std::uint64_t seed = 0;

  std::size_t size() const { return replicates.size(); }
  std::size_t flagged_count() const;
};

/// Everything produced for one point across R replicates.
struct PointEnsemble {
  Point point;
  std::vector<PointEstimate> estimates;
  BandEnsemble local;
  BandEnsemble global;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// R independent simulations of `model`, each pseudo-normalised and estimated
/// at every point. Replicate r uses derive_seed(seed, 0, r).
std::vector<PointEnsemble> replicate_ensembles(const ModelSpec& model, std::size_t R, Eigen::Index n,
                                               const EstimationConfig& config, std::span<const Point> points,
                                               std::uint64_t seed, const ProgressFn& progress = {});

/// Single-point convenience over replicate_ensembles using config.point.
PointEnsemble replicate_ensemble(const ModelSpec& model, std::size_t R, Eigen::Index n,
                                 const EstimationConfig& config, std::uint64_t seed);

/// Circular moving-block bootstrap over whole rows. Replicate r uses
/// derive_seed(seed, 1, r).
std::vector<PseudoNormalizedSeries> block_bootstrap(const PseudoNormalizedSeries& series, Eigen::Index block_length,
                                                    std::size_t R, std::uint64_t seed);

std::vector<PointEnsemble> bootstrap_ensembles(const PseudoNormalizedSeries& series, Eigen::Index block_length,
                                               std::size_t R, const EstimationConfig& config,
                                               std::span<const Point> points, std::uint64_t seed,
                                               const ProgressFn& progress = {});

/// Build an ensemble from already-estimated replicates.
PointEnsemble assemble_ensemble(Point point, std::vector<PointEstimate> estimates, const EstimationConfig& config,
                                EnsembleSource source, std::uint64_t seed);

struct Band {
  Eigen::VectorXd median;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::VectorXd width() const { return upper - lower; }
};

struct ConfidenceBands {
  Band co;
  Band quad;
  Band amplitude;
  Band phase;
  /// Phase band reaches past +-pi after recentring.
  std::vector<bool> branch_cut;
  double lower_prob = 0.05;
  double upper_prob = 0.95;
  std::size_t used = 0;
  std::size_t excluded = 0;
};

/// Order statistic x_(ceil(p * R)) of the sorted sample (1-based, at least 1).
double order_statistic(std::span<const double> sorted, double p);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

struct AngleQuantiles {
  double lower = 0.0;
  double median = 0.0;
  double upper = 0.0;
  bool branch_cut = false;
};

/// Quantiles of angles after recentring on the circular median (the sample
/// angle minimising the summed arc distance). The median is wrapped into
/// (-pi, pi]; the bounds follow it and may extend beyond.
AngleQuantiles circular_quantiles(std::span<const double> angles, double lower_prob, double upper_prob);

ConfidenceBands pointwise_bands(const BandEnsemble& ensemble, double lower_prob = 0.05, double upper_prob = 0.95);

struct QuantileTriple {
  double lower = 0.0;
  double median = 0.0;
  double upper = 0.0;
};

struct ComplexSummary {
  double omega = 0.0;
  Eigen::VectorXcd points;
  QuantileTriple real;
  QuantileTriple imag;
  QuantileTriple modulus;
  QuantileTriple argument;
  bool branch_cut = false;
};

ComplexSummary complex_summary_at_frequency(const BandEnsemble& ensemble, double omega, double lower_prob = 0.05,
                                            double upper_prob = 0.95);

}  // namespace lgspec
