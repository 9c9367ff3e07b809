#pragma once

// Shared fixtures for the test binaries.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "stlisa/spatial_weights.hpp"
#include "stlisa/synthetic.hpp"

namespace testing_support {

inline stlisa::WeightMatrix grid_weights(std::size_t rows, std::size_t cols, stlisa::Contiguity rule,
                                         bool include_self) {
  const auto areas = stlisa::synthetic::grid_areas(rows, cols);
  return stlisa::row_normalize(stlisa::build_contiguity(areas, rule), include_self);
}

/// +1/-1 alternating lattice; already a population z-score vector.
inline std::vector<double> checkerboard(std::size_t rows, std::size_t cols) {
  std::vector<double> z;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) z.push_back((r + c) % 2 == 0 ? 1.0 : -1.0);
  return z;
}

inline std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(3.0, 2.0);
  std::vector<double> v(n);
  for (auto& x : v) x = normal(gen);
  return v;
}

inline std::vector<double> unwrap(const std::vector<std::optional<double>>& v) {
  std::vector<double> out;
  for (const auto& x : v) out.push_back(*x);
  return out;
}

inline std::vector<std::optional<double>> wrap(const std::vector<double>& v) {
  return {v.begin(), v.end()};
}

}  // namespace testing_support
