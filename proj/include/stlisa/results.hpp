#pragma once

// Run configuration and the result set written to disk.
//
// Serialized layout (keys sorted, doubles in shortest round-trip form):
//   schema_version, config, dataset{locations, timesteps, digest, id_field, name_field},
//   values[location][timestep], zvalues[location][timestep],
//   global{timestep: {statistic: cell}}, local{timestep: {method: [cell]}},
//   aggregate{timestep: [{core, h, color}]}, warnings[]

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stlisa/aggregation.hpp"
#include "stlisa/error.hpp"
#include "stlisa/permutation.hpp"
#include "stlisa/spatial_weights.hpp"
#include "stlisa/statistics.hpp"

namespace stlisa {

inline constexpr int kSchemaVersion = 1;

inline StatKind parse_method(std::string_view s) {
  if (s == "local-moran") return StatKind::LocalMoran;
  if (s == "local-geary") return StatKind::LocalGeary;
  if (s == "gi-star") return StatKind::GiStar;
  if (s == "gi") return StatKind::Gi;
  throw InputError("unknown method '" + std::string(s) + "' (expected local-moran, local-geary, gi-star, gi)");
}

/// Global statistic reported alongside a local method.
inline StatKind global_family(StatKind local) {
  switch (local) {
    case StatKind::LocalMoran: return StatKind::GlobalMoran;
    case StatKind::LocalGeary: return StatKind::GlobalGeary;
    case StatKind::GiStar:
    case StatKind::Gi: return StatKind::GeneralG;
    default: throw InputError(to_string(local) + " is not a local method");
  }
}

struct RunConfig {
  std::vector<StatKind> methods{StatKind::LocalMoran, StatKind::LocalGeary, StatKind::GiStar};
  Contiguity contiguity = Contiguity::Queen;
  int snap_precision = 6;
  double alpha = 0.05;
  std::size_t permutations = kDefaultPermutations;
  std::uint64_t seed = 0;
  std::size_t global_sketch_size = 199;
  std::size_t local_sketch_size = 49;
  bool store_local_sketches = false;
  /// Worker count, 0 = auto. Does not affect results and is not serialized.
  std::size_t threads = 0;

  void validate() const {
    if (methods.empty()) throw InputError("at least one method must be enabled");
    for (std::size_t i = 0; i < methods.size(); ++i) {
      if (!is_local(methods[i])) throw InputError(to_string(methods[i]) + " is not a local method");
      for (std::size_t j = 0; j < i; ++j) {
        if (methods[i] == methods[j]) throw InputError("method " + to_string(methods[i]) + " listed twice");
      }
    }
    if (!(alpha > 0.0 && alpha <= 0.5)) throw InputError("alpha must lie in (0, 0.5]");
    if (permutations < kMinPermutations) {
      throw InputError("at least " + std::to_string(kMinPermutations) + " permutations are required");
    }
    (void)cutoff_rank(alpha, permutations);
    if (global_sketch_size < 3 || local_sketch_size < 3) throw InputError("sketch sizes must be at least 3");
    if (snap_precision < 0 || snap_precision > 12) throw InputError("snap precision must lie in [0, 12]");
  }

  /// Global statistics implied by the enabled methods, in first-use order.
  std::vector<StatKind> global_statistics() const {
    std::vector<StatKind> out;
    for (auto m : methods) {
      auto g = global_family(m);
      if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(g);
    }
    return out;
  }

  InferenceParams inference() const { return {permutations, alpha, RngPolicy{seed}}; }

  bool operator==(const RunConfig& o) const {
    return methods == o.methods && contiguity == o.contiguity && snap_precision == o.snap_precision &&
           alpha == o.alpha && permutations == o.permutations && seed == o.seed &&
           global_sketch_size == o.global_sketch_size && local_sketch_size == o.local_sketch_size &&
           store_local_sketches == o.store_local_sketches;
  }
};

inline void to_json(nlohmann::json& j, const RunConfig& c) {
  auto methods = nlohmann::json::array();
  for (auto m : c.methods) methods.push_back(to_string(m));
  j = nlohmann::json{{"methods", methods},
                     {"contiguity", to_string(c.contiguity)},
                     {"snap_precision", c.snap_precision},
                     {"alpha", c.alpha},
                     {"permutations", c.permutations},
                     {"seed", c.seed},
                     {"global_sketch_size", c.global_sketch_size},
                     {"local_sketch_size", c.local_sketch_size},
                     {"store_local_sketches", c.store_local_sketches}};
}

inline void from_json(const nlohmann::json& j, RunConfig& c) {
  c.methods.clear();
  for (const auto& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
  c.contiguity = parse_contiguity(j.at("contiguity").get<std::string>());
  c.snap_precision = j.at("snap_precision").get<int>();
  c.alpha = j.at("alpha").get<double>();
  c.permutations = j.at("permutations").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.global_sketch_size = j.at("global_sketch_size").get<std::size_t>();
  c.local_sketch_size = j.at("local_sketch_size").get<std::size_t>();
  c.store_local_sketches = j.at("store_local_sketches").get<bool>();
}

/// One statistic's outcome for one location (or the whole dataset) at one timestep.
/// Numeric fields are empty for no-data / no-neighbors / degenerate cells.
struct MethodResult {
  std::string statistic;
  std::optional<double> value;
  std::optional<double> znorm;
  std::optional<double> pseudo_p;
  std::optional<double> lower;
  std::optional<double> upper;
  std::string label;
  std::optional<std::vector<double>> sketch;

  bool operator==(const MethodResult&) const = default;
};

struct AggregateCell {
  CoreGroup core = CoreGroup::NoData;
  double h = 0.0;
  Rgb color;
  bool operator==(const AggregateCell&) const = default;
};

struct LocationInfo {
  std::string id;
  std::optional<std::string> name;
  bool operator==(const LocationInfo&) const = default;
};

struct TimestepResults {
  /// Keyed like the config's global_statistics(); empty when the timestep was skipped.
  std::vector<MethodResult> global;
  /// [method][location], methods in config order.
  std::vector<std::vector<MethodResult>> local;
  std::vector<AggregateCell> aggregate;
  bool operator==(const TimestepResults&) const = default;
};

struct ResultSet {
  RunConfig config;
  std::string dataset_digest;
  /// GeoJSON property the location ids were read from; consumers join geometry on it.
  std::string id_field = "id";
  std::optional<std::string> name_field;
  std::vector<LocationInfo> locations;
  std::vector<std::string> timesteps;
  std::vector<std::vector<std::optional<double>>> values;   // [location][timestep]
  std::vector<std::vector<std::optional<double>>> zvalues;  // [location][timestep]
  std::vector<TimestepResults> per_timestep;
  std::vector<std::string> warnings;

  bool operator==(const ResultSet&) const = default;

  std::optional<std::size_t> location_index(std::string_view id) const {
    for (std::size_t i = 0; i < locations.size(); ++i) {
      if (locations[i].id == id) return i;
    }
    return std::nullopt;
  }

  std::optional<std::size_t> timestep_index(std::string_view label) const {
    for (std::size_t t = 0; t < timesteps.size(); ++t) {
      if (timesteps[t] == label) return t;
    }
    return std::nullopt;
  }
};

namespace detail {

inline nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

inline std::optional<double> opt_double(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

inline nlohmann::json cell_json(const MethodResult& r, bool with_statistic) {
  nlohmann::json j{{"value", opt_json(r.value)},   {"znorm", opt_json(r.znorm)}, {"pseudo_p", opt_json(r.pseudo_p)},
                   {"lower", opt_json(r.lower)},   {"upper", opt_json(r.upper)}, {"label", r.label}};
  if (with_statistic) j["statistic"] = r.statistic;
  if (r.sketch) j["sketch"] = *r.sketch;
  return j;
}

inline MethodResult cell_from_json(const nlohmann::json& j, std::string statistic) {
  MethodResult r;
  r.statistic = j.contains("statistic") ? j.at("statistic").get<std::string>() : std::move(statistic);
  r.value = opt_double(j, "value");
  r.znorm = opt_double(j, "znorm");
  r.pseudo_p = opt_double(j, "pseudo_p");
  r.lower = opt_double(j, "lower");
  r.upper = opt_double(j, "upper");
  r.label = j.at("label").get<std::string>();
  if (j.contains("sketch") && !j.at("sketch").is_null()) r.sketch = j.at("sketch").get<std::vector<double>>();
  return r;
}

inline nlohmann::json matrix_json(const std::vector<std::vector<std::optional<double>>>& m) {
  auto out = nlohmann::json::array();
  for (const auto& row : m) {
    auto r = nlohmann::json::array();
    for (const auto& v : row) r.push_back(opt_json(v));
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<std::vector<std::optional<double>>> matrix_from_json(const nlohmann::json& j) {
  std::vector<std::vector<std::optional<double>>> m;
  for (const auto& row : j) {
    auto& r = m.emplace_back();
    for (const auto& v : row) r.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
  }
  return m;
}

}  // namespace detail

inline nlohmann::json to_json(const ResultSet& rs) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["config"] = rs.config;

  auto locs = nlohmann::json::array();
  for (const auto& l : rs.locations) {
    locs.push_back({{"id", l.id}, {"name", l.name ? nlohmann::json(*l.name) : nlohmann::json()}});
  }
  j["dataset"] = {{"locations", locs},
                  {"timesteps", rs.timesteps},
                  {"digest", rs.dataset_digest},
                  {"id_field", rs.id_field},
                  {"name_field", rs.name_field ? nlohmann::json(*rs.name_field) : nlohmann::json()}};
  j["values"] = detail::matrix_json(rs.values);
  j["zvalues"] = detail::matrix_json(rs.zvalues);

  nlohmann::json global = nlohmann::json::object();
  nlohmann::json local = nlohmann::json::object();
  nlohmann::json aggregate = nlohmann::json::object();
  for (std::size_t t = 0; t < rs.per_timestep.size(); ++t) {
    const auto& ts = rs.per_timestep[t];
    const auto& label = rs.timesteps[t];

    nlohmann::json g = nlohmann::json::object();
    for (const auto& cell : ts.global) g[cell.statistic] = detail::cell_json(cell, true);
    global[label] = std::move(g);

    nlohmann::json l = nlohmann::json::object();
    for (std::size_t m = 0; m < ts.local.size(); ++m) {
      auto cells = nlohmann::json::array();
      for (const auto& cell : ts.local[m]) cells.push_back(detail::cell_json(cell, false));
      l[to_string(rs.config.methods[m])] = std::move(cells);
    }
    local[label] = std::move(l);

    auto agg = nlohmann::json::array();
    for (const auto& a : ts.aggregate) agg.push_back({{"core", to_string(a.core)}, {"h", a.h}, {"color", to_hex(a.color)}});
    aggregate[label] = std::move(agg);
  }
  j["global"] = std::move(global);
  j["local"] = std::move(local);
  j["aggregate"] = std::move(aggregate);
  j["warnings"] = rs.warnings;
  return j;
}

inline ResultSet result_set_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema_version").get<int>() != kSchemaVersion) throw InputError("unsupported results schema version");
    ResultSet rs;
    rs.config = j.at("config").get<RunConfig>();
    const auto& ds = j.at("dataset");
    for (const auto& l : ds.at("locations")) {
      LocationInfo info{l.at("id").get<std::string>(), std::nullopt};
      if (l.contains("name") && !l.at("name").is_null()) info.name = l.at("name").get<std::string>();
      rs.locations.push_back(std::move(info));
    }
    rs.timesteps = ds.at("timesteps").get<std::vector<std::string>>();
    rs.dataset_digest = ds.at("digest").get<std::string>();
    rs.id_field = ds.at("id_field").get<std::string>();
    if (ds.contains("name_field") && !ds.at("name_field").is_null()) {
      rs.name_field = ds.at("name_field").get<std::string>();
    }
    rs.values = detail::matrix_from_json(j.at("values"));
    rs.zvalues = detail::matrix_from_json(j.at("zvalues"));

    const auto globals = rs.config.global_statistics();
    for (const auto& label : rs.timesteps) {
      TimestepResults ts;
      const auto& g = j.at("global").at(label);
      for (auto stat : globals) {
        const auto key = to_string(stat);
        if (g.contains(key)) ts.global.push_back(detail::cell_from_json(g.at(key), key));
      }
      const auto& l = j.at("local").at(label);
      for (auto method : rs.config.methods) {
        auto& cells = ts.local.emplace_back();
        for (const auto& c : l.at(to_string(method))) cells.push_back(detail::cell_from_json(c, to_string(method)));
      }
      for (const auto& a : j.at("aggregate").at(label)) {
        ts.aggregate.push_back({parse_core_group(a.at("core").get<std::string>()), a.at("h").get<double>(),
                                parse_hex(a.at("color").get<std::string>())});
      }
      rs.per_timestep.push_back(std::move(ts));
    }
    rs.warnings = j.at("warnings").get<std::vector<std::string>>();
    return rs;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed results file: ") + e.what());
  }
}

/// Canonical bytes: sorted keys, compact, trailing newline.
inline std::string serialize(const ResultSet& rs) { return to_json(rs).dump() + "\n"; }

inline ResultSet parse_results(std::string_view bytes) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("malformed results file: ") + e.what());
  }
  return result_set_from_json(j);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw InputError("error reading " + path.string());
  return ss.str();
}

/// Writes via a sibling temporary file and rename, so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw ComputeError("directory does not exist: " + dir.string());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ComputeError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ComputeError("error writing " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw ComputeError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline void write_results(const ResultSet& rs, const std::filesystem::path& path) {
  write_file_atomic(path, serialize(rs));
}

inline ResultSet read_results(const std::filesystem::path& path) { return parse_results(read_file(path)); }

}  // namespace stlisa
