#include "lgspec/app/run_config.hpp"

#include "lgspec/app/export.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#ifndef LGSPEC_DATA_DIR
#define LGSPEC_DATA_DIR "data"
#endif

namespace lgspec::app {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const std::string item = trim(std::string_view(s).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(const std::string& field, const std::string& s) {
  double x = 0.0;
  const std::string t = trim(s);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) throw ConfigError(field, "not a number ('" + s + "')");
  return x;
}

long long parse_int(const std::string& field, const std::string& s) {
  long long x = 0;
  const std::string t = trim(s);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) throw ConfigError(field, "not an integer ('" + s + "')");
  return x;
}

std::uint64_t parse_u64(const std::string& field, const std::string& s) {
  std::uint64_t x = 0;
  const std::string t = trim(s);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(field, "not a non-negative integer ('" + s + "')");
  }
  return x;
}

std::vector<double> parse_doubles(const std::string& field, const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(parse_double(field, item));
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
  return out;
}

std::string delimiter_name(char d) {
  switch (d) {
    case ',': return "comma";
    case ';': return "semicolon";
    case '\t': return "tab";
    case ' ': return "space";
  }
  return std::string(1, d);
}

char delimiter_from_name(const std::string& s) {
  if (s == "comma" || s == ",") return ',';
  if (s == "semicolon" || s == ";") return ';';
  if (s == "tab") return '\t';
  if (s == "space") return ' ';
  throw ConfigError("data.delimiter", "expected comma, semicolon, tab or space");
}

std::string model_key(const ModelSpec& m) {
  if (std::holds_alternative<FixedSeries>(m)) throw ConfigError("model.name", "fixed series cannot be configured");
  return model_name(m);
}

ModelSpec model_from_table(const std::map<std::string, std::string>& t) {
  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = t.find(key);
    return it == t.end() ? nullptr : &it->second;
  };
  const std::string name = get("name") ? *get("name") : "gaussian-wn";
  auto allow = [&](std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : t) {
      if (k == "name") continue;
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
        throw ConfigError("model." + k, "unknown key for model '" + name + "'");
      }
    }
  };
  if (name == "gaussian-wn") {
    allow({"rho"});
    GaussianWnParams p;
    if (auto v = get("rho")) p.rho = parse_double("model.rho", *v);
    return p;
  }
  if (name == "cosine") {
    allow({"alpha", "theta", "sigma"});
    CosineParams p;
    if (auto v = get("alpha")) p.alpha = parse_double("model.alpha", *v);
    if (auto v = get("theta")) p.theta = parse_double("model.theta", *v);
    if (auto v = get("sigma")) p.sigma = parse_double("model.sigma", *v);
    return p;
  }
  if (name == "local-trig" || name == "local-trig-common" || name == "local-trig-individual") {
    allow({"levels", "amplitude", "amplitude_alt", "alpha", "theta", "prob"});
    LocalTrigParams p = name == "local-trig-individual" ? LocalTrigParams::individual_phases() : LocalTrigParams::common_phase();
    if (auto v = get("levels")) p.levels = parse_doubles("model.levels", *v);
    if (auto v = get("amplitude")) p.amplitude = parse_doubles("model.amplitude", *v);
    if (auto v = get("amplitude_alt")) p.amplitude_alt = parse_doubles("model.amplitude_alt", *v);
    if (auto v = get("alpha")) p.alpha = parse_doubles("model.alpha", *v);
    if (auto v = get("theta")) p.theta = parse_doubles("model.theta", *v);
    if (auto v = get("prob")) p.prob = parse_doubles("model.prob", *v);
    return p;
  }
  throw ConfigError("model.name", "unknown model '" + name + "'");
}

void model_text(std::ostringstream& out, const ModelSpec& m) {
  out << "[model]\nname = " << model_key(m) << "\n";
  if (const auto* g = std::get_if<GaussianWnParams>(&m)) {
    out << "rho = " << format_double(g->rho) << "\n";
  } else if (const auto* c = std::get_if<CosineParams>(&m)) {
    out << "alpha = " << format_double(c->alpha) << "\ntheta = " << format_double(c->theta)
        << "\nsigma = " << format_double(c->sigma) << "\n";
  } else if (const auto* t = std::get_if<LocalTrigParams>(&m)) {
    out << "levels = " << join(t->levels) << "\namplitude = " << join(t->amplitude)
        << "\namplitude_alt = " << join(t->amplitude_alt) << "\nalpha = " << join(t->alpha)
        << "\ntheta = " << join(t->theta) << "\nprob = " << join(t->prob) << "\n";
  }
}

json model_json(const ModelSpec& m) {
  json j;
  j["name"] = model_key(m);
  if (const auto* g = std::get_if<GaussianWnParams>(&m)) {
    j["rho"] = g->rho;
  } else if (const auto* c = std::get_if<CosineParams>(&m)) {
    j["alpha"] = c->alpha;
    j["theta"] = c->theta;
    j["sigma"] = c->sigma;
  } else if (const auto* t = std::get_if<LocalTrigParams>(&m)) {
    j["levels"] = t->levels;
    j["amplitude"] = t->amplitude;
    j["amplitude_alt"] = t->amplitude_alt;
    j["alpha"] = t->alpha;
    j["theta"] = t->theta;
    j["prob"] = t->prob;
  }
  return j;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Point percentile_to_point(const std::string& spec) {
  const auto sep = spec.find("::");
  if (sep == std::string::npos || spec.find("::", sep + 2) != std::string::npos) {
    throw ConfigError("points", "malformed percentile pair '" + spec + "' (expected a::b)");
  }
  auto percent = [&](std::string part) {
    part = trim(part);
    if (!part.empty() && part.back() == '%') part.pop_back();
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), x);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size()) {
      throw ConfigError("points", "malformed percentile pair '" + spec + "'");
    }
    if (!(x > 0.0 && x < 100.0)) throw ConfigError("points", "percentiles must lie in (0, 100) in '" + spec + "'");
    return normal_quantile(x / 100.0);
  };
  return {percent(spec.substr(0, sep)), percent(spec.substr(sep + 2))};
}

std::string to_string(BandMode m) {
  switch (m) {
    case BandMode::none: return "none";
    case BandMode::replicates: return "replicates";
    case BandMode::bootstrap: return "bootstrap";
  }
  return "none";
}

BandMode band_mode_from_string(const std::string& s) {
  if (s == "none") return BandMode::none;
  if (s == "replicates") return BandMode::replicates;
  if (s == "bootstrap") return BandMode::bootstrap;
  throw ConfigError("bands.mode", "expected none, replicates or bootstrap");
}

void validate(const RunConfig& c) {
  if (c.source == DataKind::model) {
    if (c.n < 3) throw ConfigError("data.n", "series length must be at least 3");
    try {
      if (const auto* g = std::get_if<GaussianWnParams>(&c.model)) {
        if (!(std::abs(g->rho) < 1.0)) throw ConfigError("model.rho", "|rho| must be < 1");
      } else if (const auto* p = std::get_if<CosineParams>(&c.model)) {
        if (!(p->alpha > 0.0 && p->alpha < 0.5)) throw ConfigError("model.alpha", "must lie in (0, 1/2)");
        if (!(p->sigma >= 0.0)) throw ConfigError("model.sigma", "must be >= 0");
      } else if (const auto* t = std::get_if<LocalTrigParams>(&c.model)) {
        t->validate();
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError("model", e.what());
    }
    if (c.k >= 2 || c.l >= 2) throw ConfigError(c.k >= 2 ? "estimation.k" : "estimation.l", "model series have 2 columns");
  } else {
    if (c.csv.empty()) throw ConfigError("data.csv", "a CSV path is required");
    if (c.columns.size() < 2) throw ConfigError("data.columns", "at least two columns are required");
    if (c.k >= static_cast<int>(c.columns.size()) || c.l >= static_cast<int>(c.columns.size())) {
      throw ConfigError(c.k >= static_cast<int>(c.columns.size()) ? "estimation.k" : "estimation.l",
                        "column index out of range");
    }
    if (c.bands == BandMode::replicates) throw ConfigError("bands.mode", "replicates need a model source; use bootstrap");
  }
  if (c.k < 0) throw ConfigError("estimation.k", "must be >= 0");
  if (c.l < 0) throw ConfigError("estimation.l", "must be >= 0");
  if (c.k == c.l) throw ConfigError("estimation.l", "k and l must differ");
  if (c.points.empty()) throw ConfigError("points", "at least one point is required");
  for (const auto& p : c.points) percentile_to_point(p);
  if (!(c.bandwidth.b1 > 0.0)) throw ConfigError("estimation.bandwidth", "b1 must be > 0");
  if (!(c.bandwidth.b2 > 0.0)) throw ConfigError("estimation.bandwidth", "b2 must be > 0");
  if (c.truncation < 1) throw ConfigError("estimation.truncation", "m must be >= 1");
  if (c.source == DataKind::model && c.truncation >= c.n - 1) throw ConfigError("estimation.truncation", "m must be < n - 1");
  if (c.grid < 2) throw ConfigError("estimation.grid", "at least 2 frequencies are required");
  if (c.bands != BandMode::none && c.replicates < 2) throw ConfigError("bands.replicates", "R must be >= 2 for bands");
  if (!(c.lower_prob > 0.0 && c.lower_prob < c.upper_prob && c.upper_prob < 1.0)) {
    throw ConfigError("bands.probs", "must satisfy 0 < lower < upper < 1");
  }
  if (c.block_length < 1) throw ConfigError("bands.block_length", "must be >= 1");
  if (c.bands == BandMode::bootstrap && c.source == DataKind::model && c.block_length > c.n) {
    throw ConfigError("bands.block_length", "must not exceed n");
  }
  if (c.bands == BandMode::replicates && c.transform != Transform::raw) {
    throw ConfigError("data.transform", "model replicates are used untransformed");
  }
}

RunConfig parse_config(const std::string& text) {
  std::map<std::string, std::map<std::string, std::string>> tables;
  std::string table;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no), "unterminated table header");
      table = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no), "expected key = value");
    tables[table][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  RunConfig c;
  auto take = [&](const std::string& t, const std::string& k) -> std::optional<std::string> {
    auto ti = tables.find(t);
    if (ti == tables.end()) return std::nullopt;
    auto ki = ti->second.find(k);
    if (ki == ti->second.end()) return std::nullopt;
    std::string v = ki->second;
    ti->second.erase(ki);
    return v;
  };

  if (auto v = take("data", "source")) {
    if (*v == "model") {
      c.source = DataKind::model;
    } else if (*v == "csv") {
      c.source = DataKind::csv;
    } else {
      throw ConfigError("data.source", "expected model or csv");
    }
  }
  if (auto v = take("data", "n")) c.n = parse_int("data.n", *v);
  if (auto v = take("data", "csv")) c.csv = *v;
  if (auto v = take("data", "columns")) c.columns = split_list(*v);
  if (auto v = take("data", "delimiter")) c.delimiter = delimiter_from_name(*v);
  if (auto v = take("data", "transform")) {
    try {
      c.transform = transform_from_string(*v);
    } catch (const std::exception& e) {
      throw ConfigError("data.transform", e.what());
    }
  }
  if (tables.count("model")) {
    c.model = model_from_table(tables["model"]);
    tables.erase("model");
  }
  if (auto v = take("estimation", "k")) c.k = static_cast<int>(parse_int("estimation.k", *v));
  if (auto v = take("estimation", "l")) c.l = static_cast<int>(parse_int("estimation.l", *v));
  if (auto v = take("estimation", "points")) c.points = split_list(*v);
  if (auto v = take("estimation", "bandwidth")) {
    const auto b = parse_doubles("estimation.bandwidth", *v);
    if (b.size() == 1) {
      c.bandwidth = {b[0], b[0]};
    } else if (b.size() == 2) {
      c.bandwidth = {b[0], b[1]};
    } else {
      throw ConfigError("estimation.bandwidth", "expected one or two values");
    }
  }
  if (auto v = take("estimation", "truncation")) c.truncation = static_cast<int>(parse_int("estimation.truncation", *v));
  if (auto v = take("estimation", "order")) {
    const auto p = parse_int("estimation.order", *v);
    if (p != 1 && p != 5) throw ConfigError("estimation.order", "expected 1 or 5");
    c.order = static_cast<ApproxOrder>(p);
  }
  if (auto v = take("estimation", "window")) {
    try {
      c.window = lag_window_from_string(*v);
    } catch (const std::exception& e) {
      throw ConfigError("estimation.window", e.what());
    }
  }
  if (auto v = take("estimation", "grid")) c.grid = parse_int("estimation.grid", *v);
  if (auto v = take("bands", "mode")) c.bands = band_mode_from_string(*v);
  if (auto v = take("bands", "replicates")) {
    const auto r = parse_int("bands.replicates", *v);
    if (r < 0) throw ConfigError("bands.replicates", "must be >= 0");
    c.replicates = static_cast<std::size_t>(r);
  }
  if (auto v = take("bands", "probs")) {
    const auto p = parse_doubles("bands.probs", *v);
    if (p.size() != 2) throw ConfigError("bands.probs", "expected two values");
    c.lower_prob = p[0];
    c.upper_prob = p[1];
  }
  if (auto v = take("bands", "block_length")) c.block_length = parse_int("bands.block_length", *v);
  if (auto v = take("bands", "seed")) c.seed = parse_u64("bands.seed", *v);
  if (auto v = take("output", "path")) c.output = *v;

  for (const auto& [t, keys] : tables) {
    if (!keys.empty()) throw ConfigError((t.empty() ? "" : t + ".") + keys.begin()->first, "unknown key");
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_text(const RunConfig& c, bool include_output) {
  std::ostringstream out;
  out << "[data]\nsource = " << (c.source == DataKind::model ? "model" : "csv") << "\n";
  if (c.source == DataKind::model) {
    out << "n = " << c.n << "\n";
  } else {
    out << "csv = " << c.csv.string() << "\ncolumns = " << join(c.columns)
        << "\ndelimiter = " << delimiter_name(c.delimiter) << "\n";
  }
  out << "transform = " << to_string(c.transform) << "\n\n";
  if (c.source == DataKind::model) {
    model_text(out, c.model);
    out << "\n";
  }
  out << "[estimation]\nk = " << c.k << "\nl = " << c.l << "\npoints = " << join(c.points)
      << "\nbandwidth = " << format_double(c.bandwidth.b1) << ", " << format_double(c.bandwidth.b2)
      << "\ntruncation = " << c.truncation << "\norder = " << static_cast<int>(c.order)
      << "\nwindow = " << to_string(c.window) << "\ngrid = " << c.grid << "\n\n";
  out << "[bands]\nmode = " << to_string(c.bands) << "\nreplicates = " << c.replicates
      << "\nprobs = " << format_double(c.lower_prob) << ", " << format_double(c.upper_prob)
      << "\nblock_length = " << c.block_length << "\nseed = " << c.seed << "\n";
  if (include_output && !c.output.empty()) out << "\n[output]\npath = " << c.output.string() << "\n";
  return out.str();
}

std::string config_hash(const RunConfig& c) {
  std::uint64_t h = fnv1a(to_text(c, false));
  if (c.source == DataKind::csv) {
    std::ifstream in(c.csv, std::ios::binary);
    if (in) {
      std::ostringstream ss;
      ss << in.rdbuf();
      h = fnv1a(ss.str(), h);
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json to_json(const RunConfig& c) {
  json j;
  j["source"] = c.source == DataKind::model ? "model" : "csv";
  if (c.source == DataKind::model) {
    j["model"] = model_json(c.model);
    j["n"] = c.n;
  } else {
    j["csv"] = c.csv.string();
    j["columns"] = c.columns;
    j["delimiter"] = delimiter_name(c.delimiter);
  }
  j["transform"] = to_string(c.transform);
  j["k"] = c.k;
  j["l"] = c.l;
  j["points"] = c.points;
  j["bandwidth"] = {c.bandwidth.b1, c.bandwidth.b2};
  j["truncation"] = c.truncation;
  j["order"] = static_cast<int>(c.order);
  j["window"] = to_string(c.window);
  j["grid"] = c.grid;
  j["mode"] = to_string(c.bands);
  j["replicates"] = c.replicates;
  j["probs"] = {c.lower_prob, c.upper_prob};
  j["block_length"] = c.block_length;
  j["seed"] = c.seed;
  return j;
}

RunConfig from_json(const json& j, RunConfig c) {
  if (!j.is_object()) throw ConfigError("body", "expected a JSON object");
  static const std::set<std::string> known{"source", "csv", "columns", "delimiter", "n",     "transform", "model",      "k",    "l",        "points",
                                           "bandwidth", "truncation", "order", "window", "grid", "mode",
                                           "replicates", "probs", "block_length", "seed"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError(key, "unknown field");
  }
  auto integer = [&](const char* key) {
    const json& v = j.at(key);
    if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
    return v.get<long long>();
  };
  auto text = [&](const char* key) {
    const json& v = j.at(key);
    if (!v.is_string()) throw ConfigError(key, "expected a string");
    return v.get<std::string>();
  };
  if (j.contains("source")) {
    const std::string s = text("source");
    if (s != "model" && s != "csv") throw ConfigError("source", "expected model or csv");
    c.source = s == "model" ? DataKind::model : DataKind::csv;
  }
  if (j.contains("csv")) c.csv = text("csv");
  if (j.contains("columns")) {
    const json& cols = j.at("columns");
    if (!cols.is_array() || !std::all_of(cols.begin(), cols.end(), [](const json& x) { return x.is_string(); })) {
      throw ConfigError("columns", "expected an array of column names");
    }
    c.columns = cols.get<std::vector<std::string>>();
  }
  if (j.contains("delimiter")) c.delimiter = delimiter_from_name(text("delimiter"));
  if (j.contains("n")) c.n = integer("n");
  if (j.contains("transform")) {
    try {
      c.transform = transform_from_string(text("transform"));
    } catch (const DataError& e) {
      throw ConfigError("transform", e.what());
    }
  }
  if (j.contains("model")) {
    const json& m = j.at("model");
    if (!m.is_object()) throw ConfigError("model", "expected an object");
    std::map<std::string, std::string> table;
    for (const auto& [k, v] : m.items()) {
      if (v.is_string()) {
        table[k] = v.get<std::string>();
      } else if (v.is_number()) {
        table[k] = format_double(v.get<double>());
      } else if (v.is_array()) {
        std::vector<double> xs;
        for (const auto& x : v) {
          if (!x.is_number()) throw ConfigError("model." + k, "expected numbers");
          xs.push_back(x.get<double>());
        }
        table[k] = join(xs);
      } else {
        throw ConfigError("model." + k, "unsupported value");
      }
    }
    c.source = DataKind::model;
    c.model = model_from_table(table);
  }
  if (j.contains("k")) c.k = static_cast<int>(integer("k"));
  if (j.contains("l")) c.l = static_cast<int>(integer("l"));
  if (j.contains("points")) {
    const json& p = j.at("points");
    c.points.clear();
    if (p.is_string()) {
      c.points = split_list(p.get<std::string>());
    } else if (p.is_array()) {
      for (const auto& x : p) {
        if (!x.is_string()) throw ConfigError("points", "expected percentile strings such as \"10::10\"");
        c.points.push_back(x.get<std::string>());
      }
    } else {
      throw ConfigError("points", "expected a string or an array of strings");
    }
    for (const auto& s : c.points) percentile_to_point(s);
  }
  if (j.contains("bandwidth")) {
    const json& b = j.at("bandwidth");
    if (b.is_number()) {
      c.bandwidth = {b.get<double>(), b.get<double>()};
    } else if (b.is_array() && b.size() == 2 && b[0].is_number() && b[1].is_number()) {
      c.bandwidth = {b[0].get<double>(), b[1].get<double>()};
    } else {
      throw ConfigError("bandwidth", "expected a number or [b1, b2]");
    }
  }
  if (j.contains("truncation")) c.truncation = static_cast<int>(integer("truncation"));
  if (j.contains("order")) {
    const auto p = integer("order");
    if (p != 1 && p != 5) throw ConfigError("order", "expected 1 or 5");
    c.order = static_cast<ApproxOrder>(p);
  }
  if (j.contains("window")) {
    try {
      c.window = lag_window_from_string(text("window"));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError("window", e.what());
    }
  }
  if (j.contains("grid")) c.grid = integer("grid");
  if (j.contains("mode")) {
    try {
      c.bands = band_mode_from_string(text("mode"));
    } catch (const ConfigError& e) {
      throw ConfigError("mode", "expected none, replicates or bootstrap");
    }
  }
  if (j.contains("replicates")) {
    const auto r = integer("replicates");
    if (r < 0) throw ConfigError("replicates", "must be >= 0");
    c.replicates = static_cast<std::size_t>(r);
  }
  if (j.contains("probs")) {
    const json& p = j.at("probs");
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw ConfigError("probs", "expected [lower, upper]");
    }
    c.lower_prob = p[0].get<double>();
    c.upper_prob = p[1].get<double>();
  }
  if (j.contains("block_length")) c.block_length = integer("block_length");
  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      throw ConfigError("seed", "expected a non-negative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  return c;
}

EstimationConfig estimation_config(const RunConfig& c) {
  EstimationConfig e;
  e.bandwidth = c.bandwidth;
  e.truncation = c.truncation;
  e.order = c.order;
  e.window = c.window;
  e.grid = FrequencyGrid::uniform(c.grid);
  e.k = c.k;
  e.l = c.l;
  return e;
}

std::vector<Point> resolve_points(const RunConfig& c) {
  std::vector<Point> out;
  for (const auto& s : c.points) out.push_back(percentile_to_point(s));
  return out;
}

PseudoNormalizedSeries observed_series(const RunConfig& c) {
  MultivariateSeries s = c.source == DataKind::csv ? load_csv(c.csv, c.columns, c.delimiter)
                                                   : simulate(c.model, c.n, derive_seed(c.seed, 0, 0));
  if (c.transform == Transform::log_return) s = log_returns(s);
  return pseudo_normalize(s);
}

namespace {

json curve_band(const Band& b) {
  return {{"median", std::vector<double>(b.median.begin(), b.median.end())},
          {"lower", std::vector<double>(b.lower.begin(), b.lower.end())},
          {"upper", std::vector<double>(b.upper.begin(), b.upper.end())}};
}

json curve_single(const Eigen::VectorXd& v) {
  const std::vector<double> x(v.begin(), v.end());
  return {{"median", x}, {"lower", x}, {"upper", x}};
}

json bands_json(const ConfidenceBands& b) {
  json j;
  j["co"] = curve_band(b.co);
  j["quad"] = curve_band(b.quad);
  j["amplitude"] = curve_band(b.amplitude);
  j["phase"] = curve_band(b.phase);
  return j;
}

json spectrum_json(const SpectrumEstimate& s) {
  json j;
  j["co"] = curve_single(s.co);
  j["quad"] = curve_single(s.quad);
  j["amplitude"] = curve_single(s.amplitude);
  j["phase"] = curve_single(s.phase);
  return j;
}

std::vector<double> vec(const Eigen::VectorXd& v) { return {v.begin(), v.end()}; }

json replicate_json(const PointEstimate& est, bool flagged) {
  return {{"forward", vec(est.local.rho.forward)},
          {"reflected", vec(est.local.rho.reflected)},
          {"global_forward", vec(est.global.forward)},
          {"global_reflected", vec(est.global.reflected)},
          {"flagged", flagged}};
}

std::size_t total_fits(const PointEstimate& est) {
  return est.local.forward_status.size() + est.local.reflected_status.size();
}

}  // namespace

json run_config(const RunConfig& cfg, const ProgressFn& progress) {
  validate(cfg);
  const auto start = std::chrono::steady_clock::now();
  const EstimationConfig est_cfg = estimation_config(cfg);
  const std::vector<Point> points = resolve_points(cfg);

  json record;
  record["config_hash"] = config_hash(cfg);
  record["config"] = to_json(cfg);
  record["mode"] = to_string(cfg.bands);
  record["omega"] = vec(est_cfg.grid.values());

  std::size_t fits = 0, failed = 0, flagged_total = 0;
  json out_points = json::array();

  if (cfg.bands == BandMode::none) {
    const PseudoNormalizedSeries z = observed_series(cfg);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const PointEstimate est = estimate_point(z, est_cfg, points[i]);
      const bool flagged = est.degenerate || !est.local.all_converged();
      json p;
      p["label"] = cfg.points[i];
      p["v"] = {points[i].v1, points[i].v2};
      p["local"] = spectrum_json(local_spectrum(est, est_cfg));
      p["global"] = spectrum_json(global_spectrum(est, est_cfg));
      p["branch_cut"] = json::array();
      p["replicates"] = {{"total", 1}, {"used", flagged ? 0 : 1}, {"flagged", flagged ? 1 : 0}};
      p["correlations"] = json::array({replicate_json(est, flagged)});
      const std::size_t pf = est.degenerate ? total_fits(est) : est.local.failed_fits();
      p["convergence"] = {{"fits", total_fits(est)}, {"failed", pf}};
      fits += total_fits(est);
      failed += pf;
      flagged_total += flagged ? 1 : 0;
      out_points.push_back(std::move(p));
    }
  } else {
    std::vector<PointEnsemble> ensembles;
    if (cfg.bands == BandMode::replicates) {
      ensembles = replicate_ensembles(cfg.model, cfg.replicates, cfg.n, est_cfg, points, cfg.seed, progress);
    } else {
      const PseudoNormalizedSeries z = observed_series(cfg);
      if (cfg.block_length > z.size()) throw ConfigError("bands.block_length", "must not exceed the series length");
      ensembles = bootstrap_ensembles(z, cfg.block_length, cfg.replicates, est_cfg, points, cfg.seed, progress);
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
      const PointEnsemble& e = ensembles[i];
      json p;
      p["label"] = cfg.points[i];
      p["v"] = {points[i].v1, points[i].v2};
      const std::size_t flagged = e.local.flagged_count();
      p["replicates"] = {{"total", e.local.size()}, {"used", e.local.size() - flagged}, {"flagged", flagged}};
      if (e.local.size() - flagged >= 2) {
        const ConfidenceBands local = pointwise_bands(e.local, cfg.lower_prob, cfg.upper_prob);
        p["local"] = bands_json(local);
        json cuts = json::array();
        for (std::size_t j = 0; j < local.branch_cut.size(); ++j) {
          if (local.branch_cut[j]) cuts.push_back(j);
        }
        p["branch_cut"] = cuts;
      } else {
        p["local"] = nullptr;
        p["branch_cut"] = json::array();
      }
      p["global"] = bands_json(pointwise_bands(e.global, cfg.lower_prob, cfg.upper_prob));
      json reps = json::array();
      std::size_t pfits = 0, pfailed = 0;
      for (std::size_t r = 0; r < e.estimates.size(); ++r) {
        const PointEstimate& est = e.estimates[r];
        reps.push_back(replicate_json(est, e.local.flagged[r]));
        pfits += total_fits(est);
        pfailed += est.degenerate ? total_fits(est) : est.local.failed_fits();
      }
      p["correlations"] = std::move(reps);
      p["convergence"] = {{"fits", pfits}, {"failed", pfailed}};
      fits += pfits;
      failed += pfailed;
      flagged_total += flagged;
      out_points.push_back(std::move(p));
    }
  }
  record["points"] = std::move(out_points);
  record["convergence"] = {{"fits", fits}, {"failed", failed}, {"flagged_replicates", flagged_total}};
  record["timing_ms"] =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return record;
}

namespace {

LagCorrelations correlations_from(const json& forward, const json& reflected) {
  LagCorrelations c;
  const auto f = forward.get<std::vector<double>>();
  const auto r = reflected.get<std::vector<double>>();
  c.forward = Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
  c.reflected = Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
  return c;
}

json summary_json(const ComplexSummary& s) {
  json pts = json::array();
  for (const auto& z : s.points) pts.push_back({z.real(), z.imag()});
  auto triple = [](const QuantileTriple& q) { return json{{"lower", q.lower}, {"median", q.median}, {"upper", q.upper}}; };
  return {{"points", pts},           {"real", triple(s.real)},       {"imag", triple(s.imag)},
          {"modulus", triple(s.modulus)}, {"argument", triple(s.argument)}, {"branch_cut", s.branch_cut}};
}

}  // namespace

json complex_summary(const json& record, std::size_t point, double omega) {
  const json& points = record.at("points");
  if (point >= points.size()) throw ConfigError("point", "no such point in the record");
  const RunConfig cfg = from_json(record.at("config"));
  const FrequencyGrid full = FrequencyGrid::uniform(record.at("omega").size());
  const Eigen::Index j = full.nearest(omega);
  const FrequencyGrid single(Eigen::VectorXd::Constant(1, full[j]));

  BandEnsemble local, global;
  for (const auto& rep : points[point].at("correlations")) {
    SpectrumConfig sc;
    local.replicates.push_back(
        make_spectrum(correlations_from(rep.at("forward"), rep.at("reflected")), cfg.window, single, sc));
    local.flagged.push_back(rep.at("flagged").get<bool>());
    global.replicates.push_back(
        make_spectrum(correlations_from(rep.at("global_forward"), rep.at("global_reflected")), cfg.window, single, sc));
    global.flagged.push_back(false);
  }
  if (global.size() < 2) throw ConfigError("hash", "complex summaries need a replicate ensemble (R >= 2)");

  json out;
  out["omega"] = full[j];
  out["index"] = j;
  out["label"] = points[point].at("label");
  out["local"] = local.size() - local.flagged_count() >= 2
                     ? summary_json(complex_summary_at_frequency(local, full[j], cfg.lower_prob, cfg.upper_prob))
                     : json(nullptr);
  out["global"] = summary_json(complex_summary_at_frequency(global, full[j], cfg.lower_prob, cfg.upper_prob));
  return out;
}

std::vector<std::string> figure_names() {
  return {"gaussian-wn", "cosine", "local-trig-common", "local-trig-off-diagonal", "local-trig-individual", "real-data"};
}

RunConfig figure_config(const std::string& name) {
  RunConfig c;
  c.seed = 1;
  if (name == "gaussian-wn") {
    c.model = GaussianWnParams{0.35};
  } else if (name == "cosine") {
    c.model = CosineParams{0.302, std::numbers::pi / 3.0, 0.75};
  } else if (name == "local-trig-common") {
    c.model = LocalTrigParams::common_phase();
  } else if (name == "local-trig-off-diagonal") {
    c.model = LocalTrigParams::common_phase();
    c.points = {"10::90", "90::10", "10::50"};
  } else if (name == "local-trig-individual") {
    c.model = LocalTrigParams::individual_phases();
  } else if (name == "real-data") {
    c.source = DataKind::csv;
    c.csv = std::filesystem::path(LGSPEC_DATA_DIR) / "demo_indices.csv";
    c.columns = {"IDX1", "IDX2", "IDX3", "IDX4"};
    c.transform = Transform::log_return;
    c.bands = BandMode::bootstrap;
    c.block_length = 100;
  } else {
    throw ConfigError("figure", "unknown figure '" + name + "'");
  }
  return c;
}

}  // namespace lgspec::app
