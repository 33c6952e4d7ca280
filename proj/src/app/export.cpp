#include "lgspec/app/export.hpp"

#include <charconv>
#include <fstream>

namespace lgspec::app {

std::string format_double(double x) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

namespace {

std::string label_slug(std::string label) {
  const auto sep = label.find("::");
  if (sep != std::string::npos) label.replace(sep, 2, "-");
  for (char& c : label) {
    if (c == '%' || c == ' ') c = '_';
  }
  return label;
}

std::string cell(const json& curve, const char* key, std::size_t i) {
  if (curve.is_null()) return "";
  return format_double(curve.at(key).at(i).get<double>());
}

}  // namespace

std::vector<std::filesystem::path> export_csv(const json& record, const std::filesystem::path& dir,
                                              const std::string& prefix) {
  std::filesystem::create_directories(dir);
  const auto omega = record.at("omega").get<std::vector<double>>();
  std::vector<std::filesystem::path> written;
  for (const auto& p : record.at("points")) {
    for (const char* curve : {"co", "quad", "amplitude", "phase"}) {
      const auto path = dir / (prefix + "_" + label_slug(p.at("label").get<std::string>()) + "_" + curve + ".csv");
      const json local = p.at("local").is_null() ? json(nullptr) : p.at("local").at(curve);
      const json& global = p.at("global").at(curve);
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write " + path.string());
      out << "omega,local_median,local_lo,local_hi,global_median,global_lo,global_hi\n";
      for (std::size_t i = 0; i < omega.size(); ++i) {
        out << format_double(omega[i]) << ',' << cell(local, "median", i) << ',' << cell(local, "lower", i) << ','
            << cell(local, "upper", i) << ',' << cell(global, "median", i) << ',' << cell(global, "lower", i) << ','
            << cell(global, "upper", i) << '\n';
      }
      written.push_back(path);
    }
  }
  return written;
}

json correlations_json(const PointEstimate& est) {
  json lags = json::array();
  const auto& rho = est.local.rho;
  for (Eigen::Index h = 0; h < rho.forward.size(); ++h) {
    json row;
    row["lag"] = h;
    row["forward"] = rho.forward[h];
    row["forward_converged"] = est.local.forward_status[h].converged;
    row["global_forward"] = est.global.forward[h];
    if (h > 0) {
      row["reflected"] = rho.reflected[h - 1];
      row["reflected_converged"] = est.local.reflected_status[h - 1].converged;
      row["global_reflected"] = est.global.reflected[h - 1];
    }
    lags.push_back(std::move(row));
  }
  return {{"v", {est.point.v1, est.point.v2}},
          {"degenerate", est.degenerate},
          {"failed_fits", est.local.failed_fits()},
          {"lags", lags}};
}

json to_json(const CoincidenceReport& r) {
  json pts = json::array();
  for (const auto& p : r.points) {
    pts.push_back({{"v", {p.point.v1, p.point.v2}},
                   {"max_gap", p.max_gap},
                   {"coverage_co", p.coverage_co},
                   {"coverage_quad", p.coverage_quad},
                   {"coverage_phase", p.coverage_phase},
                   {"wider_fraction", p.wider_fraction},
                   {"flagged", p.flagged},
                   {"pass", p.pass}});
  }
  return {{"rho", r.rho}, {"tolerance", r.tolerance}, {"points", pts}, {"pass", r.pass}};
}

json to_json(const RateReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) rows.push_back({{"n", row.n}, {"variance", row.variance}, {"used", row.used}});
  return {{"rows", rows}, {"slope", r.slope}, {"slope_stderr", r.slope_stderr}, {"expected", r.expected}};
}

}  // namespace lgspec::app
