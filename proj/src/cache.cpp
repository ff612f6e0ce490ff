#include "quasispec/cache.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

namespace quasispec {

namespace fs = std::filesystem;

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 15]);
  }
  return out;
}

const std::string& code_version_tag() {
  static const std::string tag = std::string("quasispec-") + QUASISPEC_VERSION + "/r1";
  return tag;
}

CacheKey CacheKey::of(const nlohmann::json& descriptor) {
  // nlohmann objects keep keys sorted, so dump() is canonical.
  return {sha256_hex(descriptor.dump() + "\n" + code_version_tag())};
}

ResultCache::ResultCache(fs::path dir, Warn warn) : dir_(std::move(dir)), warn_(std::move(warn)) {
  if (dir_.empty()) return;
  std::error_code ec;
  fs::create_directories(dir_, ec);
  const fs::path probe = dir_ / (".probe-" + std::to_string(
                                    std::hash<std::thread::id>{}(std::this_thread::get_id())));
  std::ofstream out(probe);
  if (ec || !out) {
    this->warn("cache directory " + dir_.string() + " is not writable; running uncached");
    return;
  }
  out.close();
  fs::remove(probe, ec);
  enabled_ = true;
}

fs::path ResultCache::path_for(const CacheKey& key) const { return dir_ / (key.hex + ".json"); }

void ResultCache::warn(const std::string& msg) const {
  if (warn_) warn_(msg);
}

std::optional<nlohmann::json> ResultCache::lookup(const CacheKey& key) {
  if (!enabled_) return std::nullopt;
  const fs::path path = path_for(key);
  std::ifstream in(path);
  if (!in) {
    ++misses_;
    return std::nullopt;
  }
  try {
    nlohmann::json entry = nlohmann::json::parse(in);
    if (entry.at("key").get<std::string>() != key.hex) throw std::runtime_error("key mismatch");
    ++hits_;
    return entry.at("record");
  } catch (const std::exception& e) {
    warn("discarding corrupt cache entry " + path.string() + " (" + e.what() + ")");
    std::error_code ec;
    fs::remove(path, ec);
    ++misses_;
    return std::nullopt;
  }
}

void ResultCache::store(const CacheKey& key, const nlohmann::json& record) {
  if (!enabled_) return;
  static std::atomic<unsigned long> counter{0};
  std::ostringstream tmp_name;
  tmp_name << "." << key.hex << "." << ::getpid() << "."
           << std::hash<std::thread::id>{}(std::this_thread::get_id()) << "." << counter++
           << ".tmp";
  const fs::path tmp = dir_ / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary);
    out << nlohmann::json{{"key", key.hex}, {"version", code_version_tag()}, {"record", record}}
               .dump();
    if (!out) {
      warn("could not write cache entry " + tmp.string());
      std::error_code ec;
      fs::remove(tmp, ec);
      return;
    }
  }
  std::error_code ec;
  fs::rename(tmp, path_for(key), ec);
  if (ec) {
    warn("could not publish cache entry " + path_for(key).string() + ": " + ec.message());
    fs::remove(tmp, ec);
  }
}

}  // namespace quasispec
