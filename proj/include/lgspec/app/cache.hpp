#pragma once

#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <string>

namespace lgspec::app {

/// Result records keyed by config hash, one file per record. Writes go to a
/// temporary file and are renamed into place.
class ResultCache {
 public:
  explicit ResultCache(std::filesystem::path dir);

  /// $LGSPEC_CACHE_DIR, else ./.lgspec-cache
  static std::filesystem::path default_dir();

  std::optional<std::string> get(const std::string& hash) const;
  void put(const std::string& hash, const std::string& record);
  bool contains(const std::string& hash) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path path_for(const std::string& hash) const;

  std::filesystem::path dir_;
  mutable std::shared_mutex mutex_;
};

}  // namespace lgspec::app
