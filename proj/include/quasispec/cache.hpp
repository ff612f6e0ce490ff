#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace quasispec {

/// Hex SHA-256 of the canonical dump of a descriptor plus the code version
/// tag.
struct CacheKey {
  std::string hex;

  static CacheKey of(const nlohmann::json& descriptor);
  friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

std::string sha256_hex(const std::string& data);

/// Version tag mixed into every key; bump when cached results change.
const std::string& code_version_tag();

/// One JSON file per key. Stores write a temporary file in the same
/// directory and rename it into place, so readers never see partial
/// entries and concurrent writers of one key both succeed.
class ResultCache {
 public:
  using Warn = std::function<void(const std::string&)>;

  /// An empty path disables the cache. An unwritable directory disables it
  /// with a warning.
  explicit ResultCache(std::filesystem::path dir, Warn warn = {});

  bool enabled() const { return enabled_; }
  const std::filesystem::path& dir() const { return dir_; }

  /// Absent on a miss; a corrupt entry is removed with a warning.
  std::optional<nlohmann::json> lookup(const CacheKey& key);
  void store(const CacheKey& key, const nlohmann::json& record);

  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

 private:
  std::filesystem::path path_for(const CacheKey& key) const;
  void warn(const std::string& msg) const;

  std::filesystem::path dir_;
  Warn warn_;
  bool enabled_ = false;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

}  // namespace quasispec
