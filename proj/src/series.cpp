#include "lgspec/series.hpp"

#include <unsupported/Eigen/SpecialFunctions>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace lgspec {

std::string to_string(Transform t) {
  return t == Transform::raw ? "raw" : "log-return";
}

Transform transform_from_string(const std::string& s) {
  if (s == "raw") return Transform::raw;
  if (s == "log-return" || s == "log_return" || s == "logret") return Transform::log_return;
  throw DataError("unknown transform '" + s + "'");
}

Eigen::Index MultivariateSeries::column_index(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw DataError("no column named '" + name + "'");
  return static_cast<Eigen::Index>(it - names.begin());
}

namespace {

std::vector<std::string> split(const std::string& line, char delimiter) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, delimiter)) out.push_back(cell);
  if (!line.empty() && line.back() == delimiter) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

bool parse_double(const std::string& cell, double& out) {
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

}  // namespace

MultivariateSeries load_csv(const std::filesystem::path& path,
                            const std::vector<std::string>& columns,
                            char delimiter) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path.string() + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split(line, delimiter);
  for (auto& h : header) h = trim(h);

  std::vector<std::string> wanted = columns.empty() ? header : columns;
  std::vector<std::size_t> idx;
  for (const auto& name : wanted) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("missing column '" + name + "' in '" + path.string() + "'");
    idx.push_back(static_cast<std::size_t>(it - header.begin()));
  }

  std::vector<double> flat;
  std::size_t rows = 0;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cells = split(line, delimiter);
    if (cells.size() != header.size()) {
      throw DataError("row " + std::to_string(row_no) + ": expected " + std::to_string(header.size()) +
                      " cells, found " + std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < idx.size(); ++c) {
      double v = 0.0;
      std::string cell = trim(cells[idx[c]]);
      if (!parse_double(cell, v)) {
        throw DataError("row " + std::to_string(row_no) + ", column '" + wanted[c] +
                        "': not a number ('" + cell + "')");
      }
      flat.push_back(v);
    }
    ++rows;
  }
  if (rows < 2) throw DataError("'" + path.string() + "' has fewer than 2 data rows");

  MultivariateSeries s;
  s.names = wanted;
  s.source = path.string();
  s.values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(wanted.size()));
  return s;
}

void write_csv(const std::filesystem::path& path, const MultivariateSeries& series, char delimiter) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  for (std::size_t k = 0; k < series.names.size(); ++k) {
    if (k) out << delimiter;
    out << series.names[k];
  }
  out << '\n';
  char buf[32];
  for (Eigen::Index t = 0; t < series.size(); ++t) {
    for (Eigen::Index k = 0; k < series.dims(); ++k) {
      if (k) out << delimiter;
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, series.values(t, k));
      out.write(buf, end - buf);
    }
    out << '\n';
  }
}

MultivariateSeries log_returns(const MultivariateSeries& series) {
  if (series.size() < 2) throw DataError("log_returns needs at least 2 observations");
  if ((series.values.array() <= 0.0).any()) throw DataError("log_returns needs strictly positive values");
  const Eigen::Index n = series.size();
  MultivariateSeries out = series;
  out.values = (series.values.bottomRows(n - 1).array() / series.values.topRows(n - 1).array()).log();
  out.transform = Transform::log_return;
  return out;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must lie in (0,1)");
  return Eigen::numext::ndtri(p);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

Eigen::VectorXd pseudo_normalize(const Eigen::Ref<const Eigen::VectorXd>& column) {
  const Eigen::Index n = column.size();
  if (n < 2) throw DataError("pseudo_normalize needs at least 2 observations");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return column[a] < column[b]; });
  Eigen::VectorXd z(n);
  const double denom = static_cast<double>(n) + 1.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    z[order[static_cast<std::size_t>(r)]] = normal_quantile(static_cast<double>(r + 1) / denom);
  }
  return z;
}

PseudoNormalizedSeries pseudo_normalize(const MultivariateSeries& series) {
  PseudoNormalizedSeries out;
  out.names = series.names;
  out.values.resize(series.size(), series.dims());
  for (Eigen::Index k = 0; k < series.dims(); ++k) out.values.col(k) = pseudo_normalize(series.column(k));
  return out;
}

LagPairSet lag_pairs(const Eigen::Ref<const Eigen::VectorXd>& first,
                     const Eigen::Ref<const Eigen::VectorXd>& second,
                     Eigen::Index h, PairOrder order) {
  const Eigen::Index n = first.size();
  if (second.size() != n) throw std::invalid_argument("lag_pairs: columns differ in length");
  if (h < 0 || h >= n) throw std::invalid_argument("lag_pairs: lag must satisfy 0 <= h < n");
  LagPairSet set;
  set.lag = h;
  set.order = order;
  set.pairs.resize(n - h, 2);
  set.pairs.col(0) = first.tail(n - h);
  set.pairs.col(1) = second.head(n - h);
  return set;
}

}  // namespace lgspec
