// stlisa command-line entry point: run, serve, inspect.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stlisa/cache.hpp"
#include "stlisa/data_model.hpp"
#include "stlisa/inspect.hpp"
#include "stlisa/pipeline.hpp"
#include "stlisa/results.hpp"
#include "stlisa/server.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitRuntime = 2;

struct RunFlags {
  std::string geometry;
  std::string data;
  std::string id_col;
  std::string time_col;
  std::string value_col;
  std::string name_field;
  std::string methods = "local-moran,local-geary,gi-star";
  std::string contiguity = "queen";
  std::size_t permutations = stlisa::kDefaultPermutations;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::string out = "results.json";
  std::string cache_dir;
  bool no_cache = false;
  bool store_local_sketches = false;
  std::size_t threads = 0;
};

struct ServeFlags {
  std::string results;
  std::string geometry;
  int port = 8080;
};

struct InspectFlags {
  std::string results;
  std::string location;
  std::string timestep;
};

std::vector<stlisa::StatKind> parse_methods(const std::string& csv) {
  std::vector<stlisa::StatKind> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    const std::string item(stlisa::detail::trim(csv.substr(start, comma - start)));
    if (!item.empty()) out.push_back(stlisa::parse_method(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

/// Rethrows with the file path prepended so diagnostics point at the input.
template <typename Fn>
auto with_file_context(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const stlisa::InputError& e) {
    throw stlisa::InputError(path + ": " + e.what());
  }
}

int cmd_run(const RunFlags& f) {
  stlisa::RunConfig config;
  config.methods = parse_methods(f.methods);
  config.contiguity = stlisa::parse_contiguity(f.contiguity);
  config.permutations = f.permutations;
  config.alpha = f.alpha;
  config.seed = f.seed;
  config.store_local_sketches = f.store_local_sketches;
  config.threads = f.threads;
  config.validate();

  const std::optional<std::string> name_field =
      f.name_field.empty() ? std::nullopt : std::optional<std::string>(f.name_field);
  const std::string geometry_bytes = stlisa::read_file(f.geometry);
  const std::string values_bytes = stlisa::read_file(f.data);

  const nlohmann::json input_settings{{"id_col", f.id_col},
                                      {"time_col", f.time_col},
                                      {"value_col", f.value_col},
                                      {"name_field", f.name_field}};
  const auto key = stlisa::make_cache_key(geometry_bytes, values_bytes, config, input_settings);
  const fs::path cache_dir = f.cache_dir.empty() ? stlisa::default_cache_dir() : fs::path(f.cache_dir);

  std::optional<stlisa::ResultSet> results;
  bool from_cache = false;
  if (!f.no_cache) {
    auto hit = stlisa::cache_lookup(key, cache_dir);
    for (const auto& w : hit.warnings) std::cerr << "warning: " << w << '\n';
    if (hit.results) {
      results = std::move(hit.results);
      from_cache = true;
    }
  }

  if (!results) {
    auto areas = with_file_context(f.geometry, [&] { return stlisa::parse_geometry(geometry_bytes, f.id_col, name_field); });
    auto table = with_file_context(f.data, [&] {
      return stlisa::parse_values(values_bytes, f.id_col, f.time_col, f.value_col);
    });
    const auto dataset = stlisa::join_dataset(std::move(areas), table);
    results = stlisa::run_analysis(dataset, config);
    results->id_field = f.id_col;
    results->name_field = name_field;
    if (!f.no_cache) {
      try {
        stlisa::cache_store(key, *results, cache_dir);
      } catch (const stlisa::Error& e) {
        std::cerr << "warning: result not cached: " << e.what() << '\n';
      }
    }
  }

  stlisa::write_results(*results, f.out);

  for (const auto& w : results->warnings) std::cerr << "warning: " << w << '\n';
  std::string methods;
  for (auto m : results->config.methods) methods += (methods.empty() ? "" : ",") + stlisa::to_string(m);
  std::cout << "locations: " << results->locations.size() << '\n'
            << "timesteps: " << results->timesteps.size() << '\n'
            << "methods: " << methods << '\n'
            << "warnings: " << results->warnings.size() << '\n'
            << "results: " << f.out << (from_cache ? " (from cache)" : "") << '\n';
  return kExitOk;
}

int cmd_serve(const ServeFlags& f) {
  auto server = stlisa::DashboardServer::from_files(f.results, f.geometry);
  const std::string host = "127.0.0.1";
  const int port = server.bind(host, f.port);
  std::cout << "serving on http://" << host << ":" << port << "/" << std::endl;
  server.listen();
  return kExitOk;
}

int cmd_inspect(const InspectFlags& f) {
  const auto rs = with_file_context(f.results, [&] { return stlisa::read_results(f.results); });
  auto opt = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<std::string>(s); };
  std::cout << stlisa::inspect_table(rs, opt(f.location), opt(f.timestep));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatiotemporal local indicators of spatial association"};
  app.require_subcommand(1);

  RunFlags run;
  auto* run_cmd = app.add_subcommand("run", "Compute cluster statistics and write a results file");
  run_cmd->add_option("--geometry", run.geometry, "GeoJSON FeatureCollection of areas")->required();
  run_cmd->add_option("--data", run.data, "Long-format CSV of values")->required();
  run_cmd->add_option("--id-col", run.id_col, "Location id: CSV column and GeoJSON property")->required();
  run_cmd->add_option("--time-col", run.time_col, "Timestep column")->required();
  run_cmd->add_option("--value-col", run.value_col, "Value column")->required();
  run_cmd->add_option("--name-field", run.name_field, "GeoJSON property holding display names");
  run_cmd->add_option("--methods", run.methods, "Comma-separated: local-moran, local-geary, gi-star, gi")
      ->capture_default_str();
  run_cmd->add_option("--contiguity", run.contiguity, "Neighbor rule: queen or rook")->capture_default_str();
  run_cmd->add_option("--permutations", run.permutations, "Permutations per statistic")->capture_default_str();
  run_cmd->add_option("--alpha", run.alpha, "Significance cutoff")->capture_default_str();
  run_cmd->add_option("--seed", run.seed, "Master random seed")->capture_default_str();
  run_cmd->add_option("--out", run.out, "Results file")->capture_default_str();
  run_cmd->add_option("--cache-dir", run.cache_dir, "Result cache directory")
      ->default_str(stlisa::default_cache_dir().string());
  run_cmd->add_flag("--no-cache", run.no_cache, "Neither read nor write the cache");
  run_cmd->add_flag("--store-local-sketches", run.store_local_sketches, "Keep per-location distribution sketches");
  run_cmd->add_option("--threads", run.threads, "Worker threads, 0 = auto")->capture_default_str();

  ServeFlags serve;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the dashboard with a results file");
  serve_cmd->add_option("--results", serve.results, "Results file")->required();
  serve_cmd->add_option("--geometry", serve.geometry, "GeoJSON the results were computed on")->required();
  serve_cmd->add_option("--port", serve.port, "TCP port")->capture_default_str();

  InspectFlags inspect;
  auto* inspect_cmd = app.add_subcommand("inspect", "Print a method by timestep label table");
  inspect_cmd->add_option("--results", inspect.results, "Results file")->required();
  inspect_cmd->add_option("--location", inspect.location, "Location id (global labels when omitted)");
  inspect_cmd->add_option("--timestep", inspect.timestep, "Single timestep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*serve_cmd) return cmd_serve(serve);
    if (*inspect_cmd) return cmd_inspect(inspect);
  } catch (const stlisa::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitInput;
}
