#pragma once

#include "lgspec/inference.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgspec::app {

using nlohmann::json;

/// Invalid configuration value; `field` names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// "a::b" with a, b percentages in (0, 100); a trailing % is accepted.
Point percentile_to_point(const std::string& spec);

enum class DataKind { model, csv };
enum class BandMode { none, replicates, bootstrap };

std::string to_string(BandMode m);
BandMode band_mode_from_string(const std::string& s);

struct RunConfig {
  DataKind source = DataKind::model;
  ModelSpec model = GaussianWnParams{};
  Eigen::Index n = 1859;
  std::filesystem::path csv;
  std::vector<std::string> columns;
  char delimiter = ',';
  Transform transform = Transform::raw;

  int k = 0;
  int l = 1;
  std::vector<std::string> points{"10::10", "50::50", "90::90"};
  Bandwidth bandwidth{0.6, 0.6};
  int truncation = 10;
  ApproxOrder order = ApproxOrder::five;
  LagWindow window = LagWindow::tukey_hanning;
  Eigen::Index grid = 1024;

  BandMode bands = BandMode::replicates;
  std::size_t replicates = 100;
  double lower_prob = 0.05;
  double upper_prob = 0.95;
  Eigen::Index block_length = 100;
  std::uint64_t seed = 1;

  /// Output location; not part of the cache key.
  std::filesystem::path output;

  bool operator==(const RunConfig&) const = default;
};

/// Throws ConfigError naming the first bad field.
void validate(const RunConfig& cfg);

/// Line-oriented `key = value` text with [tables]; '#' starts a comment.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(to_text(c)) == c.
std::string to_text(const RunConfig& cfg, bool include_output = true);

/// FNV-1a 64 of the canonical text without the output path, plus the CSV
/// bytes for file sources. 16 hex digits.
std::string config_hash(const RunConfig& cfg);

json to_json(const RunConfig& cfg);
/// Applies the fields present in `j` on top of `base`.
RunConfig from_json(const json& j, RunConfig base = {});

EstimationConfig estimation_config(const RunConfig& cfg);
std::vector<Point> resolve_points(const RunConfig& cfg);

/// Loads and pseudo-normalises the observed series (CSV sources) or one
/// realisation of the model (seeded with derive_seed(seed, 0, 0)).
PseudoNormalizedSeries observed_series(const RunConfig& cfg);

/// Runs the full pipeline and returns the result record.
json run_config(const RunConfig& cfg, const ProgressFn& progress = {});

/// Complex ensemble summary for one point of a record, at the grid frequency
/// nearest `omega`.
json complex_summary(const json& record, std::size_t point, double omega);

/// Named, seeded configurations regenerating the figure data sets.
std::vector<std::string> figure_names();
RunConfig figure_config(const std::string& name);

}  // namespace lgspec::app
