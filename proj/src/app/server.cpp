#include "lgspec/app/server.hpp"

#include "httplib.h"

#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

namespace lgspec::app {

namespace {

std::vector<std::string> csv_header(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    const auto comma = line.find(',', start);
    std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') cell = cell.substr(1, cell.size() - 2);
    out.push_back(cell);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

json error_body(const std::string& field, const std::string& message) {
  return {{"error", message}, {"field", field}};
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

}  // namespace

std::map<std::string, Dataset> discover_datasets(const std::filesystem::path& data_dir) {
  std::map<std::string, Dataset> out;
  for (const char* name : {"gaussian-wn", "cosine", "local-trig-common", "local-trig-individual"}) {
    Dataset d;
    d.name = name;
    d.base = figure_config(name);
    d.n = d.base.n;
    d.columns = {"Y1", "Y2"};
    out[name] = d;
  }
  if (data_dir.empty() || !std::filesystem::is_directory(data_dir)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(data_dir)) {
    if (entry.path().extension() != ".csv") continue;
    try {
      Dataset d;
      d.name = entry.path().stem().string();
      d.columns = csv_header(entry.path());
      const MultivariateSeries s = load_csv(entry.path(), d.columns);
      d.n = s.size();
      d.base.source = DataKind::csv;
      d.base.csv = entry.path();
      d.base.columns = d.columns;
      d.base.bands = BandMode::bootstrap;
      d.base.transform = (s.values.array() > 0.0).all() ? Transform::log_return : Transform::raw;
      out[d.name] = d;
    } catch (const std::exception&) {
      // unreadable files are not offered
    }
  }
  return out;
}

struct Service::Impl {
  struct Job {
    std::string hash;
    std::atomic<std::size_t> done{0};
    std::atomic<std::size_t> total{0};
    std::atomic<bool> finished{false};
    std::string error;  // written before finished is set
  };

  ServerOptions options;
  ResultCache cache;
  std::map<std::string, Dataset> datasets;
  httplib::Server http;

  std::mutex jobs_mutex;
  std::map<std::string, std::shared_ptr<Job>> jobs;  // token -> job
  std::vector<std::jthread> workers;

  explicit Impl(ServerOptions o)
      : options(std::move(o)), cache(options.cache_dir), datasets(discover_datasets(options.data_dir)) {
    http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
    http.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    http.Get("/api/datasets", [this](const httplib::Request&, httplib::Response& res) { list_datasets(res); });
    http.Post("/api/spectra", [this](const httplib::Request& req, httplib::Response& res) { spectra(req, res); });
    http.Get(R"(/api/jobs/([0-9a-f]+))",
             [this](const httplib::Request& req, httplib::Response& res) { poll(req.matches[1], res); });
    http.Get("/api/complex", [this](const httplib::Request& req, httplib::Response& res) { complex(req, res); });
  }

  ~Impl() {
    http.stop();
    workers.clear();
  }

  void list_datasets(httplib::Response& res) {
    json out = json::array();
    for (const auto& [name, d] : datasets) {
      out.push_back({{"name", name},
                     {"n", d.n},
                     {"columns", d.columns},
                     {"transform", to_string(d.base.transform)},
                     {"source", d.base.source == DataKind::model ? "model" : "csv"},
                     {"default_mode", to_string(d.base.bands)}});
    }
    send_json(res, 200, out);
  }

  void spectra(const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::parse_error& e) {
      return send_json(res, 400, error_body("body", std::string("malformed JSON: ") + e.what()));
    }
    if (!body.is_object()) return send_json(res, 400, error_body("body", "expected a JSON object"));
    if (!body.contains("dataset") || !body["dataset"].is_string()) {
      return send_json(res, 400, error_body("dataset", "a dataset name is required"));
    }
    const std::string name = body["dataset"];
    const auto it = datasets.find(name);
    if (it == datasets.end()) return send_json(res, 404, error_body("dataset", "unknown dataset '" + name + "'"));
    const bool sync = body.value("sync", false);
    json overrides = body;
    overrides.erase("dataset");
    overrides.erase("sync");
    if (it->second.base.source == DataKind::csv && overrides.contains("model")) {
      return send_json(res, 400, error_body("model", "dataset '" + name + "' is not a model"));
    }

    RunConfig cfg;
    std::string hash;
    try {
      cfg = from_json(overrides, it->second.base);
      validate(cfg);
      hash = config_hash(cfg);
    } catch (const ConfigError& e) {
      return send_json(res, 400, error_body(e.field(), e.what()));
    }

    if (auto hit = cache.get(hash)) {
      json record = json::parse(*hit);
      record["cached"] = true;
      return send_json(res, 200, record);
    }

    const std::size_t work = cfg.bands == BandMode::none ? cfg.points.size() : cfg.replicates * cfg.points.size();
    if (!sync && work > options.async_threshold) {
      const std::string token = start_job(cfg, hash);
      return send_json(res, 202, {{"job", token}, {"status", "running"}, {"config_hash", hash}});
    }

    try {
      const json record = run_config(cfg);
      cache.put(hash, record.dump());
      json out = record;
      out["cached"] = false;
      send_json(res, 200, out);
    } catch (const ConfigError& e) {
      send_json(res, 400, error_body(e.field(), e.what()));
    } catch (const DataError& e) {
      send_json(res, 400, error_body("data", e.what()));
    }
  }

  std::string start_job(const RunConfig& cfg, const std::string& hash) {
    std::lock_guard lock(jobs_mutex);
    for (const auto& [token, job] : jobs) {
      if (job->hash == hash && !job->finished) return token;
    }
    const std::string token = hash + std::to_string(jobs.size());
    auto job = std::make_shared<Job>();
    job->hash = hash;
    job->total = cfg.replicates * cfg.points.size();
    jobs[token] = job;
    workers.emplace_back([this, cfg, job] {
      try {
        const json record = run_config(cfg, [&](std::size_t done, std::size_t total) {
          job->done = done;
          job->total = total;
        });
        cache.put(job->hash, record.dump());
      } catch (const std::exception& e) {
        job->error = e.what();
      }
      job->finished = true;
    });
    return token;
  }

  void poll(const std::string& token, httplib::Response& res) {
    std::shared_ptr<Job> job;
    {
      std::lock_guard lock(jobs_mutex);
      const auto it = jobs.find(token);
      if (it != jobs.end()) job = it->second;
    }
    if (!job) return send_json(res, 404, error_body("token", "unknown job"));
    if (!job->finished) {
      return send_json(res, 409, {{"status", "running"},
                                  {"progress", {{"done", job->done.load()}, {"total", job->total.load()}}}});
    }
    if (!job->error.empty()) return send_json(res, 500, {{"status", "failed"}, {"error", job->error}});
    const auto hit = cache.get(job->hash);
    if (!hit) return send_json(res, 500, {{"status", "failed"}, {"error", "result missing from cache"}});
    json record = json::parse(*hit);
    record["cached"] = false;
    send_json(res, 200, record);
  }

  void complex(const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("hash")) return send_json(res, 400, error_body("hash", "required"));
    if (!req.has_param("omega")) return send_json(res, 400, error_body("omega", "required"));
    const std::string hash = req.get_param_value("hash");
    double omega = 0.0;
    std::size_t point = 0;
    try {
      std::size_t used = 0;
      const std::string o = req.get_param_value("omega");
      omega = std::stod(o, &used);
      if (used != o.size() || !(omega >= 0.0 && omega <= 0.5)) throw std::invalid_argument("range");
    } catch (const std::exception&) {
      return send_json(res, 400, error_body("omega", "expected a frequency in [0, 0.5]"));
    }
    if (req.has_param("point")) {
      try {
        std::size_t used = 0;
        const std::string p = req.get_param_value("point");
        const long v = std::stol(p, &used);
        if (used != p.size() || v < 0) throw std::invalid_argument("range");
        point = static_cast<std::size_t>(v);
      } catch (const std::exception&) {
        return send_json(res, 400, error_body("point", "expected a point index"));
      }
    }
    std::optional<std::string> hit;
    try {
      hit = cache.get(hash);
    } catch (const std::invalid_argument&) {
      return send_json(res, 400, error_body("hash", "malformed hash"));
    }
    if (!hit) return send_json(res, 404, error_body("hash", "no cached result for this hash"));
    try {
      send_json(res, 200, complex_summary(json::parse(*hit), point, omega));
    } catch (const ConfigError& e) {
      send_json(res, 400, error_body(e.field(), e.what()));
    }
  }
};

Service::Service(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}
Service::~Service() = default;

bool Service::listen(const std::string& host, int port) { return impl_->http.listen(host, port); }
int Service::bind_any(const std::string& host) { return impl_->http.bind_to_any_port(host); }
bool Service::listen_after_bind() { return impl_->http.listen_after_bind(); }
void Service::stop() { impl_->http.stop(); }
void Service::wait_until_ready() const { impl_->http.wait_until_ready(); }

}  // namespace lgspec::app
