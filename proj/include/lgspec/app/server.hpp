#pragma once

#include "lgspec/app/cache.hpp"
#include "lgspec/app/run_config.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <string>

namespace httplib {
class Server;
}

namespace lgspec::app {

struct Dataset {
  std::string name;
  RunConfig base;  // data fields only; estimation fields come from the request
  Eigen::Index n = 0;
  std::vector<std::string> columns;
};

struct ServerOptions {
  std::filesystem::path cache_dir = ResultCache::default_dir();
  std::filesystem::path data_dir;  // *.csv files here become datasets
  /// Requests with replicates * points above this run as background jobs.
  std::size_t async_threshold = 50;
};

/// Built-in model datasets plus every CSV under data_dir.
std::map<std::string, Dataset> discover_datasets(const std::filesystem::path& data_dir);

class Service {
 public:
  explicit Service(ServerOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds and serves until stop(); returns false when binding fails.
  bool listen(const std::string& host, int port);
  /// Binds to an ephemeral port; returns it, or -1.
  int bind_any(const std::string& host);
  /// Serves on a socket bound with bind_any.
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace lgspec::app
