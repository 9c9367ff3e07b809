#pragma once

// Plain-text label tables: methods down the side, timesteps across.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stlisa/error.hpp"
#include "stlisa/results.hpp"

namespace stlisa {

namespace detail {

inline std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    if (width.size() < r.size()) width.resize(r.size(), 0);
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      line += r[c];
      if (c + 1 < r.size()) line += std::string(width[c] - r[c].size() + 2, ' ');
    }
    out << line << '\n';
  }
  return out.str();
}

}  // namespace detail

/// Label table for one location, or for the global statistics when no
/// location is given. `timestep` narrows the table to a single column.
inline std::string inspect_table(const ResultSet& rs, const std::optional<std::string>& location,
                                 const std::optional<std::string>& timestep) {
  std::vector<std::size_t> columns;
  if (timestep) {
    auto t = rs.timestep_index(*timestep);
    if (!t) throw InputError("unknown timestep " + *timestep);
    columns.push_back(*t);
  } else {
    for (std::size_t t = 0; t < rs.timesteps.size(); ++t) columns.push_back(t);
  }

  std::vector<std::vector<std::string>> rows;
  std::string title;
  auto header = std::vector<std::string>{location ? "method" : "statistic"};
  for (auto t : columns) header.push_back(rs.timesteps[t]);
  rows.push_back(std::move(header));

  if (!location) {
    title = "global statistics";
    for (auto stat : rs.config.global_statistics()) {
      const std::string key = to_string(stat);
      std::vector<std::string> row{key};
      for (auto t : columns) {
        const auto& g = rs.per_timestep[t].global;
        auto it = std::find_if(g.begin(), g.end(), [&](const MethodResult& r) { return r.statistic == key; });
        row.push_back(it == g.end() ? "skipped" : it->label);
      }
      rows.push_back(std::move(row));
    }
  } else {
    auto loc = rs.location_index(*location);
    if (!loc) throw InputError("unknown location " + *location);
    const auto& info = rs.locations[*loc];
    title = "location " + info.id + (info.name ? " (" + *info.name + ")" : "");
    for (std::size_t m = 0; m < rs.config.methods.size(); ++m) {
      std::vector<std::string> row{to_string(rs.config.methods[m])};
      for (auto t : columns) row.push_back(rs.per_timestep[t].local[m][*loc].label);
      rows.push_back(std::move(row));
    }
    std::vector<std::string> agg{"aggregate"};
    for (auto t : columns) {
      const auto& a = rs.per_timestep[t].aggregate[*loc];
      agg.push_back(to_string(a.core) + " " + to_hex(a.color));
    }
    rows.push_back(std::move(agg));
  }
  return title + "\n" + detail::render_table(rows);
}

}  // namespace stlisa
