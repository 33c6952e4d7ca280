#pragma once

#include "lgspec/app/run_config.hpp"
#include "lgspec/diagnostics.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace lgspec::app {

/// Shortest round-trip decimal form.
std::string format_double(double x);

/// One CSV per point and curve: <prefix>_<a>-<b>_<curve>.csv with columns
/// omega, local_median, local_lo, local_hi, global_median, global_lo, global_hi.
/// Returns the written paths.
std::vector<std::filesystem::path> export_csv(const json& record, const std::filesystem::path& dir,
                                              const std::string& prefix);

/// Local correlation records of a single-series estimate.
json correlations_json(const PointEstimate& est);

json to_json(const CoincidenceReport& r);
json to_json(const RateReport& r);

}  // namespace lgspec::app
