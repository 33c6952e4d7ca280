#pragma once

#include "lgspec/series.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace lgspec {

/// splitmix64 finaliser.
std::uint64_t mix64(std::uint64_t x);

/// Counter-based seed for stream `stream`, replicate `index` of a master seed.
/// Independent of evaluation order, so parallel ensembles stay reproducible.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

using Engine = std::mt19937_64;

struct GaussianWnParams {
  double rho = 0.35;

  friend bool operator==(const GaussianWnParams&, const GaussianWnParams&) = default;
};

/// Y1 = cos(2 pi alpha t + phi) + w_t, Y2 = cos(2 pi alpha t + phi + theta) + w_t.
struct CosineParams {
  double alpha = 0.302;
  double theta = 0.0;
  double sigma = 0.75;

  friend bool operator==(const CosineParams&, const CosineParams&) = default;
};

struct LocalTrigParams {
  std::vector<double> levels;
  std::vector<double> amplitude;
  std::vector<double> amplitude_alt;
  std::vector<double> alpha;
  std::vector<double> theta;
  std::vector<double> prob;

  std::size_t components() const { return levels.size(); }
  void validate() const;

  /// r = 4 configuration with a common phase adjustment pi/3.
  static LocalTrigParams common_phase();
  /// r = 4 configuration with phase adjustments (pi/3, pi/4, 0, pi/2).
  static LocalTrigParams individual_phases();

  friend bool operator==(const LocalTrigParams&, const LocalTrigParams&) = default;
};

/// A fixed data set; every "replicate" returns the same series.
struct FixedSeries {
  MultivariateSeries data;

  friend bool operator==(const FixedSeries& a, const FixedSeries& b) {
    return a.data.names == b.data.names && a.data.values.rows() == b.data.values.rows() &&
           a.data.values.cols() == b.data.values.cols() && a.data.values == b.data.values;
  }
};

using ModelSpec = std::variant<GaussianWnParams, CosineParams, LocalTrigParams, FixedSeries>;

std::string model_name(const ModelSpec& model);

MultivariateSeries gaussian_wn(Eigen::Index n, double rho, std::uint64_t seed);
MultivariateSeries bivariate_cosine(Eigen::Index n, const CosineParams& params, std::uint64_t seed);
MultivariateSeries local_trigonometric(Eigen::Index n, const LocalTrigParams& params, std::uint64_t seed);

MultivariateSeries simulate(const ModelSpec& model, Eigen::Index n, std::uint64_t seed);

/// Regime index N_t of each time point of the last call, for diagnostics; fills
/// `regimes` alongside the series.
MultivariateSeries local_trigonometric(Eigen::Index n, const LocalTrigParams& params, std::uint64_t seed,
                                       std::vector<int>& regimes);

}  // namespace lgspec
