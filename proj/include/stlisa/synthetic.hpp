#pragma once

// Synthetic lattice datasets: unit-square grids with generated values.

#include <cstddef>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stlisa/data_model.hpp"

namespace stlisa::synthetic {

/// Cell id for row r, column c ("r03c07").
inline std::string cell_id(std::size_t r, std::size_t c) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "r%02zuc%02zu", r, c);
  return buf;
}

/// rows x cols unit squares, row-major, as a GeoJSON FeatureCollection.
/// Features carry properties.id and properties.name.
inline std::string grid_geojson(std::size_t rows, std::size_t cols) {
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double x = static_cast<double>(c);
      const double y = static_cast<double>(r);
      nlohmann::json ring = {{x, y}, {x + 1, y}, {x + 1, y + 1}, {x, y + 1}, {x, y}};
      features.push_back({{"type", "Feature"},
                          {"properties", {{"id", cell_id(r, c)}, {"name", "cell " + std::to_string(r) + "," +
                                                                             std::to_string(c)}}},
                          {"geometry", {{"type", "Polygon"}, {"coordinates", {ring}}}}});
    }
  }
  return nlohmann::json{{"type", "FeatureCollection"}, {"features", features}}.dump();
}

inline AreaSet grid_areas(std::size_t rows, std::size_t cols) { return parse_geometry(grid_geojson(rows, cols), "id", "name"); }

/// value[t][location] in row-major grid order.
using GridSeries = std::vector<std::vector<std::optional<double>>>;

/// Long-format CSV with columns id,time,value; missing values become empty cells.
inline std::string series_csv(std::size_t rows, std::size_t cols, const std::vector<std::string>& timesteps,
                              const GridSeries& values) {
  std::ostringstream out;
  out << "id,time,value\n";
  for (std::size_t t = 0; t < timesteps.size(); ++t) {
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        const auto& v = values[t][r * cols + c];
        out << cell_id(r, c) << ',' << timesteps[t] << ',';
        if (v) out << nlohmann::json(*v).dump();
        out << '\n';
      }
    }
  }
  return out.str();
}

inline Dataset grid_dataset(std::size_t rows, std::size_t cols, const std::vector<std::string>& timesteps,
                            const GridSeries& values) {
  return join_dataset(grid_areas(rows, cols),
                      parse_values(series_csv(rows, cols, timesteps, values), "id", "time", "value"));
}

/// Standard normal noise with an optional square block shifted by `shift`.
inline std::vector<std::optional<double>> noise_with_block(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                                           std::size_t block_row, std::size_t block_col,
                                                           std::size_t block_size, double shift) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::optional<double>> v(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double x = normal(gen);
      if (r >= block_row && r < block_row + block_size && c >= block_col && c < block_col + block_size) x += shift;
      v[r * cols + c] = x;
    }
  }
  return v;
}

}  // namespace stlisa::synthetic
