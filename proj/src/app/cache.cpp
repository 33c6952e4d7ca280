#include "lgspec/app/cache.hpp"

#include <atomic>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace lgspec::app {

ResultCache::ResultCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path ResultCache::default_dir() {
  if (const char* env = std::getenv("LGSPEC_CACHE_DIR"); env && *env) return env;
  return std::filesystem::current_path() / ".lgspec-cache";
}

std::filesystem::path ResultCache::path_for(const std::string& hash) const {
  for (char c : hash) {
    if (!std::isxdigit(static_cast<unsigned char>(c))) throw std::invalid_argument("malformed cache key");
  }
  return dir_ / (hash + ".json");
}

std::optional<std::string> ResultCache::get(const std::string& hash) const {
  std::shared_lock lock(mutex_);
  std::ifstream in(path_for(hash), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool ResultCache::contains(const std::string& hash) const {
  std::shared_lock lock(mutex_);
  return std::filesystem::exists(path_for(hash));
}

void ResultCache::put(const std::string& hash, const std::string& record) {
  static std::atomic<unsigned long> counter{0};
  const auto target = path_for(hash);
  std::ostringstream tmp_name;
  tmp_name << hash << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id()) << "." << counter++;
  const auto tmp = dir_ / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write cache file " + tmp.string());
    out << record;
    out.flush();
    if (!out) throw std::runtime_error("cannot write cache file " + tmp.string());
  }
  std::unique_lock lock(mutex_);
  std::filesystem::rename(tmp, target);
}

}  // namespace lgspec::app
