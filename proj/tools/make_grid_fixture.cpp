// Writes a synthetic lattice dataset (grid.geojson + values.csv): Gaussian
// noise with a drifting high block and a fixed low block.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stlisa/results.hpp"
#include "stlisa/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic grid dataset"};
  std::size_t rows = 20;
  std::size_t cols = 20;
  std::size_t timesteps = 5;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  app.add_option("--rows", rows)->capture_default_str();
  app.add_option("--cols", cols)->capture_default_str();
  app.add_option("--timesteps", timesteps)->capture_default_str();
  app.add_option("--seed", seed)->capture_default_str();
  app.add_option("--out-dir", out_dir)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  if (rows < 6 || cols < 6) {
    std::cerr << "grid must be at least 6x6\n";
    return 1;
  }

  std::vector<std::string> labels;
  stlisa::synthetic::GridSeries series;
  for (std::size_t t = 0; t < timesteps; ++t) {
    labels.push_back(std::to_string(2000 + t));
    // The high block drifts one column per timestep; the low block stays put.
    const std::size_t hot_col = 1 + t % (cols - 4);
    auto v = stlisa::synthetic::noise_with_block(rows, cols, seed * 1000 + t, 1, hot_col, 3, 3.0);
    for (std::size_t r = rows - 4; r < rows - 1; ++r) {
      for (std::size_t c = cols - 4; c < cols - 1; ++c) *v[r * cols + c] -= 3.0;
    }
    series.push_back(std::move(v));
  }

  const std::filesystem::path dir(out_dir);
  stlisa::write_file_atomic(dir / "grid.geojson", stlisa::synthetic::grid_geojson(rows, cols) + "\n");
  stlisa::write_file_atomic(dir / "values.csv", stlisa::synthetic::series_csv(rows, cols, labels, series));
  std::cout << "wrote " << (dir / "grid.geojson").string() << " and " << (dir / "values.csv").string() << '\n';
  return 0;
}
