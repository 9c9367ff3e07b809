#pragma once

// Areal geometry, long-format value tables, and the joined, per-timestep
// z-normalized dataset everything downstream consumes.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "stlisa/error.hpp"

namespace stlisa {

struct Coord {
  double lon = 0.0;
  double lat = 0.0;
  bool operator==(const Coord&) const = default;
};

/// Closed ring: first coordinate repeated as the last one.
using Ring = std::vector<Coord>;
/// Outer ring followed by any holes.
using Polygon = std::vector<Ring>;

struct Area {
  std::string id;
  std::optional<std::string> name;
  std::vector<Polygon> polygons;  // one entry for Polygon, several for MultiPolygon
};

class AreaSet {
 public:
  AreaSet() = default;
  explicit AreaSet(std::vector<Area> areas) : areas_(std::move(areas)) {
    for (std::size_t i = 0; i < areas_.size(); ++i) {
      if (areas_[i].id.empty()) throw InputError("area " + std::to_string(i) + " has an empty id");
      if (!index_.emplace(areas_[i].id, i).second) {
        throw InputError("duplicate area id '" + areas_[i].id + "' at feature " + std::to_string(i));
      }
    }
  }

  std::size_t size() const { return areas_.size(); }
  const Area& operator[](std::size_t i) const { return areas_[i]; }
  const std::vector<Area>& areas() const { return areas_; }

  std::optional<std::size_t> index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::vector<Area> areas_;
  std::unordered_map<std::string, std::size_t> index_;
};

namespace detail {

inline std::string json_scalar_to_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer() || v.is_number_unsigned() || v.is_number_float()) return v.dump();
  return {};
}

inline Ring parse_ring(const nlohmann::json& coords, std::size_t feature) {
  if (!coords.is_array()) throw InputError("feature " + std::to_string(feature) + ": ring is not an array");
  Ring ring;
  ring.reserve(coords.size());
  for (const auto& pt : coords) {
    if (!pt.is_array() || pt.size() < 2 || !pt[0].is_number() || !pt[1].is_number()) {
      throw InputError("feature " + std::to_string(feature) + ": malformed coordinate");
    }
    ring.push_back({pt[0].get<double>(), pt[1].get<double>()});
  }
  if (ring.size() < 4 || !(ring.front() == ring.back())) {
    throw InputError("feature " + std::to_string(feature) +
                     ": polygon ring must have at least 4 positions and be closed");
  }
  return ring;
}

inline Polygon parse_polygon(const nlohmann::json& rings, std::size_t feature) {
  if (!rings.is_array() || rings.empty()) {
    throw InputError("feature " + std::to_string(feature) + ": polygon has no rings");
  }
  Polygon poly;
  poly.reserve(rings.size());
  for (const auto& r : rings) poly.push_back(parse_ring(r, feature));
  return poly;
}

inline bool parse_number(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// RFC 4180 records with their 1-based starting line numbers.
struct CsvRecord {
  std::size_t line;
  std::vector<std::string> fields;
};

inline std::vector<CsvRecord> read_csv(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<CsvRecord> records;
  CsvRecord current{1, {}};
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    bool blank = current.fields.size() == 1 && trim(current.fields[0]).empty();
    if (!blank) records.push_back(std::move(current));
    current = CsvRecord{line, {}};
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started && trim(field).empty()) {
          field.clear();
          in_quotes = true;
          field_started = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        ++line;
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw InputError("line " + std::to_string(current.line) + ": unterminated quoted field");
  if (!field.empty() || !current.fields.empty()) end_record();
  return records;
}

inline bool is_missing_token(std::string_view s) {
  s = trim(s);
  if (s.empty()) return true;
  return s.size() == 2 && (s[0] == 'N' || s[0] == 'n') && (s[1] == 'A' || s[1] == 'a');
}

}  // namespace detail

/// Reads a GeoJSON FeatureCollection of Polygon/MultiPolygon features.
/// The id comes from properties[id_field], falling back to the feature's own "id".
inline AreaSet parse_geometry(std::string_view bytes, const std::string& id_field,
                              const std::optional<std::string>& name_field = std::nullopt) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("malformed GeoJSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
      !doc["features"].is_array()) {
    throw InputError("GeoJSON root must be a FeatureCollection with a features array");
  }

  std::vector<Area> areas;
  const auto& features = doc["features"];
  areas.reserve(features.size());
  for (std::size_t f = 0; f < features.size(); ++f) {
    const auto& feat = features[f];
    const std::string where = "feature " + std::to_string(f);
    if (!feat.is_object()) throw InputError(where + ": not an object");

    Area area;
    const nlohmann::json* props = nullptr;
    if (feat.contains("properties") && feat["properties"].is_object()) props = &feat["properties"];
    if (props && props->contains(id_field)) area.id = detail::json_scalar_to_string((*props)[id_field]);
    if (area.id.empty() && feat.contains("id")) area.id = detail::json_scalar_to_string(feat["id"]);
    if (area.id.empty()) throw InputError(where + ": missing id field '" + id_field + "'");

    if (name_field && props && props->contains(*name_field)) {
      auto nm = detail::json_scalar_to_string((*props)[*name_field]);
      if (!nm.empty()) area.name = std::move(nm);
    }

    if (!feat.contains("geometry") || !feat["geometry"].is_object()) {
      throw InputError(where + ": non-areal geometry (null or missing)");
    }
    const auto& geom = feat["geometry"];
    const std::string type = geom.value("type", "");
    if (!geom.contains("coordinates")) throw InputError(where + ": geometry has no coordinates");
    if (type == "Polygon") {
      area.polygons.push_back(detail::parse_polygon(geom["coordinates"], f));
    } else if (type == "MultiPolygon") {
      if (!geom["coordinates"].is_array() || geom["coordinates"].empty()) {
        throw InputError(where + ": empty MultiPolygon");
      }
      for (const auto& p : geom["coordinates"]) area.polygons.push_back(detail::parse_polygon(p, f));
    } else {
      throw InputError(where + ": non-areal geometry '" + type + "'");
    }
    areas.push_back(std::move(area));
  }
  return AreaSet(std::move(areas));
}

struct ValueRow {
  std::string id;
  std::string timestep;
  std::optional<double> value;
};

struct TimeSeriesTable {
  std::vector<ValueRow> rows;
};

/// Long-format CSV: one row per (id, timestep). Empty and "NA" cells are missing.
inline TimeSeriesTable parse_values(std::string_view bytes, const std::string& id_col,
                                    const std::string& time_col, const std::string& value_col) {
  auto records = detail::read_csv(bytes);
  if (records.empty()) throw InputError("values table is empty");

  const auto& header = records.front().fields;
  auto find_col = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (detail::trim(header[i]) == name) return i;
    }
    throw InputError("missing column '" + name + "' in header");
  };
  const std::size_t id_idx = find_col(id_col);
  const std::size_t time_idx = find_col(time_col);
  const std::size_t value_idx = find_col(value_col);
  const std::size_t needed = std::max({id_idx, time_idx, value_idx}) + 1;

  TimeSeriesTable table;
  table.rows.reserve(records.size() - 1);
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::string where = "line " + std::to_string(rec.line);
    if (rec.fields.size() < needed) throw InputError(where + ": too few fields");

    ValueRow row;
    row.id = std::string(detail::trim(rec.fields[id_idx]));
    row.timestep = std::string(detail::trim(rec.fields[time_idx]));
    if (row.id.empty()) throw InputError(where + ": empty id");
    if (row.timestep.empty()) throw InputError(where + ": empty timestep");

    const std::string& cell = rec.fields[value_idx];
    if (!detail::is_missing_token(cell)) {
      double v = 0.0;
      if (!detail::parse_number(cell, v)) throw InputError(where + ": unparseable value '" + cell + "'");
      row.value = v;
    }
    if (!seen.emplace(row.id, row.timestep).second) {
      throw InputError(where + ": duplicate row for (" + row.id + ", " + row.timestep + ")");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

/// Numeric ascending when every label parses as a number, else lexicographic.
inline std::vector<std::string> order_timesteps(std::vector<std::string> labels) {
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  std::vector<std::pair<double, std::string>> numeric;
  numeric.reserve(labels.size());
  for (const auto& l : labels) {
    double v = 0.0;
    if (!detail::parse_number(l, v)) return labels;
    numeric.emplace_back(v, l);
  }
  std::sort(numeric.begin(), numeric.end());
  for (std::size_t i = 0; i < numeric.size(); ++i) labels[i] = numeric[i].second;
  return labels;
}

struct Normalized {
  std::vector<std::optional<double>> z;
  double mean = 0.0;
  double sd = 0.0;  // population standard deviation
};

/// z = (x - mean) / sd over the present entries; sd divides by the present count.
inline Normalized normalize_timestep(std::span<const std::optional<double>> values) {
  std::size_t n = 0;
  double sum = 0.0;
  std::optional<double> first;
  bool all_equal = true;
  for (const auto& v : values) {
    if (!v) continue;
    ++n;
    sum += *v;
    if (!first) first = *v;
    else if (*v != *first) all_equal = false;
  }
  if (n < 2) throw ComputeError("insufficient data");
  if (all_equal) throw ComputeError("degenerate timestep");

  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (const auto& v : values) {
    if (v) ss += (*v - mean) * (*v - mean);
  }
  const double sd = std::sqrt(ss / static_cast<double>(n));
  if (!(sd > 0.0)) throw ComputeError("degenerate timestep");

  Normalized out;
  out.mean = mean;
  out.sd = sd;
  out.z.reserve(values.size());
  for (const auto& v : values) {
    out.z.push_back(v ? std::optional<double>((*v - mean) / sd) : std::nullopt);
  }
  return out;
}

inline std::vector<std::optional<double>> zscore_timestep(std::span<const std::optional<double>> values) {
  return normalize_timestep(values).z;
}

struct TimestepNorm {
  bool ok = false;
  double mean = 0.0;
  double sd = 0.0;
  std::string issue;  // why the timestep could not be normalized
};

/// Location-by-timestep matrices aligned to area order and sorted timesteps.
/// Immutable after construction.
class Dataset {
 public:
  using Column = std::vector<std::optional<double>>;

  Dataset(AreaSet areas, std::vector<std::string> timesteps, std::vector<Column> by_timestep,
          std::vector<std::string> warnings)
      : areas_(std::move(areas)), timesteps_(std::move(timesteps)), values_(std::move(by_timestep)),
        warnings_(std::move(warnings)) {
    zvalues_.reserve(values_.size());
    norms_.reserve(values_.size());
    for (std::size_t t = 0; t < values_.size(); ++t) {
      TimestepNorm norm;
      try {
        auto zs = normalize_timestep(values_[t]);
        norm.ok = true;
        norm.mean = zs.mean;
        norm.sd = zs.sd;
        zvalues_.push_back(std::move(zs.z));
      } catch (const ComputeError& e) {
        norm.issue = e.what();
        zvalues_.emplace_back(values_[t].size());
      }
      norms_.push_back(std::move(norm));
    }
  }

  const AreaSet& areas() const { return areas_; }
  std::size_t n_locations() const { return areas_.size(); }
  std::size_t n_timesteps() const { return timesteps_.size(); }
  const std::vector<std::string>& timesteps() const { return timesteps_; }

  /// Raw values at timestep t, one entry per location.
  const Column& values(std::size_t t) const { return values_[t]; }
  /// z-scores at timestep t; all missing when the timestep is degenerate.
  const Column& zvalues(std::size_t t) const { return zvalues_[t]; }
  const TimestepNorm& norm(std::size_t t) const { return norms_[t]; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  AreaSet areas_;
  std::vector<std::string> timesteps_;
  std::vector<Column> values_;
  std::vector<Column> zvalues_;
  std::vector<TimestepNorm> norms_;
  std::vector<std::string> warnings_;
};

inline Dataset join_dataset(AreaSet areas, const TimeSeriesTable& table) {
  std::vector<std::string> labels;
  labels.reserve(table.rows.size());
  std::vector<std::string> unknown;
  std::unordered_set<std::string> unknown_seen;
  for (const auto& row : table.rows) {
    labels.push_back(row.timestep);
    if (!areas.index_of(row.id) && unknown_seen.insert(row.id).second) unknown.push_back(row.id);
  }
  if (!unknown.empty()) {
    std::string msg = unknown.size() == 1 ? "unknown location " : "unknown locations ";
    for (std::size_t i = 0; i < unknown.size(); ++i) msg += (i ? ", " : "") + unknown[i];
    throw InputError(msg);
  }
  auto timesteps = order_timesteps(std::move(labels));
  if (timesteps.empty()) throw InputError("values table has no timesteps");

  std::unordered_map<std::string, std::size_t> t_index;
  for (std::size_t t = 0; t < timesteps.size(); ++t) t_index.emplace(timesteps[t], t);

  std::vector<Dataset::Column> cols(timesteps.size(), Dataset::Column(areas.size()));
  std::vector<bool> has_rows(areas.size(), false);
  for (const auto& row : table.rows) {
    const std::size_t loc = *areas.index_of(row.id);
    cols[t_index.at(row.timestep)][loc] = row.value;
    has_rows[loc] = true;
  }

  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < areas.size(); ++i) {
    if (!has_rows[i]) warnings.push_back("location " + areas[i].id + " has no rows in the values table");
  }
  return Dataset(std::move(areas), std::move(timesteps), std::move(cols), std::move(warnings));
}

}  // namespace stlisa
