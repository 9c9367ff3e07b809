#pragma once

// Content-addressed on-disk result cache: one file per key under a directory.
// Each file wraps the results with the key and a digest of the results bytes,
// both checked on lookup.

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "stlisa/digest.hpp"
#include "stlisa/results.hpp"

namespace stlisa {

struct CacheKey {
  std::string hex;
  bool operator==(const CacheKey&) const = default;
};

/// Digest of the raw input bytes, the run configuration and any extra input
/// settings (column names and the like) that change how the bytes are read.
inline CacheKey make_cache_key(std::string_view geometry_bytes, std::string_view values_bytes,
                               const RunConfig& config, const nlohmann::json& input_settings = nlohmann::json::object()) {
  Sha256 h;
  h.field("stlisa-cache-v1");
  h.field(geometry_bytes);
  h.field(values_bytes);
  h.field(nlohmann::json(config).dump());
  h.field(input_settings.dump());
  return {h.hex()};
}

inline std::filesystem::path default_cache_dir() {
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return std::filesystem::path(xdg) / "stlisa";
  if (const char* home = std::getenv("HOME"); home && *home) {
    return std::filesystem::path(home) / ".cache" / "stlisa";
  }
  return std::filesystem::temp_directory_path() / "stlisa-cache";
}

inline std::filesystem::path cache_path(const CacheKey& key, const std::filesystem::path& dir) {
  return dir / (key.hex + ".json");
}

struct CacheLookup {
  std::optional<ResultSet> results;
  std::vector<std::string> warnings;
};

/// Returns the cached results on a verified hit. Unreadable or mismatching
/// files are renamed to *.corrupt and reported as a miss.
inline CacheLookup cache_lookup(const CacheKey& key, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  CacheLookup out;
  const fs::path path = cache_path(key, dir);
  std::error_code ec;
  if (!fs::exists(path, ec)) return out;

  try {
    const std::string bytes = read_file(path);
    const auto doc = nlohmann::json::parse(bytes);
    if (doc.at("key").get<std::string>() != key.hex) throw InputError("cache key mismatch");
    const auto& body = doc.at("results");
    if (doc.at("results_sha256").get<std::string>() != sha256_hex(body.dump())) {
      throw InputError("cache digest mismatch");
    }
    out.results = result_set_from_json(body);
  } catch (const std::exception& e) {
    fs::path quarantine = path;
    quarantine += ".corrupt";
    fs::rename(path, quarantine, ec);
    out.warnings.push_back("discarded corrupt cache file " + path.string() + " (" + e.what() + ")" +
                           (ec ? "" : ", moved to " + quarantine.string()));
    out.results.reset();
  }
  return out;
}

inline void cache_store(const CacheKey& key, const ResultSet& rs, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ComputeError("cannot create cache directory " + dir.string() + ": " + ec.message());
  const auto body = to_json(rs);
  nlohmann::json doc{{"key", key.hex}, {"results_sha256", sha256_hex(body.dump())}, {"results", body}};
  write_file_atomic(cache_path(key, dir), doc.dump() + "\n");
}

}  // namespace stlisa
