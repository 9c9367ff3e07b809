#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "stlisa/cache.hpp"
#include "stlisa/inspect.hpp"
#include "stlisa/pipeline.hpp"
#include "stlisa/results.hpp"
#include "support.hpp"

using namespace stlisa;
namespace fs = std::filesystem;
using testing_support::wrap;

namespace {

RunConfig small_config() {
  RunConfig c;
  c.permutations = 99;
  c.global_sketch_size = 25;
  c.threads = 2;
  return c;
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("stlisa_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Dataset noise_dataset(std::size_t side, std::size_t timesteps, std::uint64_t seed) {
  synthetic::GridSeries series;
  std::vector<std::string> labels;
  for (std::size_t t = 0; t < timesteps; ++t) {
    labels.push_back(std::to_string(2010 + t));
    series.push_back(synthetic::noise_with_block(side, side, seed + t, 1, 1, 2, 2.5));
  }
  return synthetic::grid_dataset(side, side, labels, series);
}

}  // namespace

TEST(RunAnalysis, CheckerboardLabels) {
  RunConfig c = small_config();
  c.contiguity = Contiguity::Rook;
  c.permutations = 999;
  const auto ds = synthetic::grid_dataset(4, 4, {"1"}, {wrap(testing_support::checkerboard(4, 4))});
  const auto rs = run_analysis(ds, c);
  ASSERT_EQ(rs.per_timestep.size(), 1u);
  const auto& g = rs.per_timestep[0].global;
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g[0].statistic, "global-moran");
  EXPECT_EQ(g[0].label, "negative-sa");
  EXPECT_EQ(g[1].statistic, "global-geary");
  EXPECT_EQ(g[1].label, "negative-sa");
  EXPECT_EQ(g[2].statistic, "general-g");
  for (const auto& cell : rs.per_timestep[0].local[0]) {
    EXPECT_TRUE(cell.label == "high-low" || cell.label == "low-high" || cell.label == "not-significant")
        << cell.label;
    EXPECT_NEAR(*cell.value, -1.0 / 15.0, 1e-12);
  }
  EXPECT_EQ(check_completeness(rs), 16u * 3u);
}

TEST(RunAnalysis, MissingTimestepSkipped) {
  synthetic::GridSeries series{synthetic::noise_with_block(4, 4, 1, 0, 0, 0, 0.0),
                               std::vector<std::optional<double>>(16),
                               synthetic::noise_with_block(4, 4, 2, 0, 0, 0, 0.0)};
  const auto ds = synthetic::grid_dataset(4, 4, {"a", "b", "c"}, series);
  const auto rs = run_analysis(ds, small_config());
  EXPECT_TRUE(rs.per_timestep[1].global.empty());
  for (const auto& m : rs.per_timestep[1].local)
    for (const auto& cell : m) EXPECT_EQ(cell.label, "no-data");
  EXPECT_EQ(rs.per_timestep[1].aggregate[0].core, CoreGroup::NoData);
  EXPECT_EQ(rs.per_timestep[0].global.size(), 3u);
  EXPECT_EQ(rs.per_timestep[2].global.size(), 3u);
  bool warned = false;
  for (const auto& w : rs.warnings) warned = warned || w.find("timestep b skipped") != std::string::npos;
  EXPECT_TRUE(warned);
  check_completeness(rs);
}

TEST(RunAnalysis, PartialMissingAndIslands) {
  auto v = synthetic::noise_with_block(5, 5, 3, 0, 0, 0, 0.0);
  v[1] = v[5] = std::nullopt;  // cell 0 loses both rook neighbors
  RunConfig c = small_config();
  c.contiguity = Contiguity::Rook;
  c.methods = {StatKind::LocalMoran, StatKind::Gi, StatKind::GiStar};
  const auto rs = run_analysis(synthetic::grid_dataset(5, 5, {"1"}, {v}), c);
  for (std::size_t m = 0; m < 3; ++m) {
    EXPECT_EQ(rs.per_timestep[0].local[m][0].label, "no-neighbors");
    EXPECT_EQ(rs.per_timestep[0].local[m][1].label, "no-data");
    EXPECT_TRUE(rs.per_timestep[0].local[m][12].value.has_value());
  }
  EXPECT_EQ(rs.per_timestep[0].global.size(), 2u);  // Moran and General G once
  check_completeness(rs);
}

TEST(RunAnalysis, AllDegenerateFails) {
  synthetic::GridSeries series{std::vector<std::optional<double>>(9, 1.0)};
  const auto ds = synthetic::grid_dataset(3, 3, {"1"}, series);
  try {
    run_analysis(ds, small_config());
    FAIL();
  } catch (const ComputeError& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate timestep"), std::string::npos) << e.what();
  }
}

TEST(RunAnalysis, ConfigValidation) {
  const auto ds = noise_dataset(4, 1, 1);
  RunConfig c = small_config();
  c.alpha = 0.01;
  try {
    run_analysis(ds, c);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_STREQ(e.what(), "insufficient permutations for requested cutoff");
  }
  c = small_config();
  c.methods.clear();
  EXPECT_THROW(run_analysis(ds, c), InputError);
  c.methods = {StatKind::LocalMoran, StatKind::LocalMoran};
  EXPECT_THROW(run_analysis(ds, c), InputError);
}

TEST(RunAnalysis, DeterministicAcrossThreads) {
  const auto ds = noise_dataset(7, 2, 5);
  RunConfig c = small_config();
  c.methods = {StatKind::LocalMoran, StatKind::LocalGeary, StatKind::GiStar, StatKind::Gi};
  c.store_local_sketches = true;
  c.local_sketch_size = 9;
  c.threads = 1;
  const auto one = serialize(run_analysis(ds, c));
  c.threads = 3;
  EXPECT_EQ(one, serialize(run_analysis(ds, c)));
  c.threads = 8;
  EXPECT_EQ(one, serialize(run_analysis(ds, c)));
  c.seed = 1;
  EXPECT_NE(one, serialize(run_analysis(ds, c)));
}

TEST(RunAnalysis, AggregateMatchesLabels) {
  const auto rs = run_analysis(noise_dataset(6, 1, 9), small_config());
  const auto& ts = rs.per_timestep[0];
  for (std::size_t i = 0; i < rs.locations.size(); ++i) {
    std::vector<ClusterLabel> labels;
    for (const auto& m : ts.local) {
      const auto l = parse_cluster_label(m[i].label);
      labels.push_back(l);
    }
    const auto a = aggregate_color(labels);
    EXPECT_EQ(ts.aggregate[i].core, a.core);
    EXPECT_EQ(ts.aggregate[i].color, a.color);
    for (std::size_t m = 0; m < ts.local.size(); ++m) {
      EXPECT_TRUE(is_legal_label(rs.config.methods[m], labels[m]));
    }
  }
}

TEST(Results, RoundTripAndSchema) {
  RunConfig c = small_config();
  c.store_local_sketches = true;
  c.local_sketch_size = 5;
  auto rs = run_analysis(noise_dataset(4, 2, 3), c);
  rs.name_field = "name";
  const std::string bytes = serialize(rs);
  const auto back = parse_results(bytes);
  EXPECT_TRUE(back == rs);
  EXPECT_EQ(serialize(back), bytes);

  const auto j = nlohmann::json::parse(bytes);
  for (const char* key : {"schema_version", "config", "dataset", "values", "zvalues", "global", "local", "aggregate",
                          "warnings"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["dataset"]["locations"][0]["id"], "r00c00");
  EXPECT_EQ(j["dataset"]["timesteps"], (nlohmann::json{"2010", "2011"}));
  const auto& cell = j["local"]["2010"]["local-moran"][0];
  for (const char* key : {"value", "znorm", "pseudo_p", "lower", "upper", "label", "sketch"}) {
    EXPECT_TRUE(cell.contains(key)) << key;
  }
  const auto& gcell = j["global"]["2011"]["global-moran"];
  EXPECT_EQ(gcell["statistic"], "global-moran");
  EXPECT_EQ(gcell["sketch"].size(), 25u);
  EXPECT_TRUE(j["aggregate"]["2010"][0]["color"].get<std::string>().starts_with("#"));
}

TEST(Results, NoLocalSketchByDefault) {
  const auto j = to_json(run_analysis(noise_dataset(4, 1, 3), small_config()));
  EXPECT_FALSE(j["local"]["2010"]["gi-star"][0].contains("sketch"));
}

TEST(Results, WriteReadAndMissingDirectory) {
  const auto dir = scratch_dir("results");
  const auto rs = run_analysis(noise_dataset(4, 1, 3), small_config());
  write_results(rs, dir / "out.json");
  EXPECT_TRUE(read_results(dir / "out.json") == rs);
  try {
    write_results(rs, dir / "nope" / "out.json");
    FAIL();
  } catch (const ComputeError& e) {
    EXPECT_NE(std::string(e.what()).find((dir / "nope").string()), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_results("{\"schema_version\": 2}"), InputError);
  fs::remove_all(dir);
}

TEST(Cache, MissStoreHitCorrupt) {
  const auto dir = scratch_dir("cache");
  const RunConfig c = small_config();
  const auto key = make_cache_key("geo", "vals", c);
  EXPECT_FALSE(cache_lookup(key, dir).results);

  const auto rs = run_analysis(noise_dataset(4, 1, 3), c);
  cache_store(key, rs, dir);
  const auto hit = cache_lookup(key, dir);
  ASSERT_TRUE(hit.results);
  EXPECT_TRUE(*hit.results == rs);

  const auto path = cache_path(key, dir);
  const auto full = read_file(path);
  std::ofstream(path, std::ios::trunc) << full.substr(0, full.size() / 2);
  const auto miss = cache_lookup(key, dir);
  EXPECT_FALSE(miss.results);
  ASSERT_EQ(miss.warnings.size(), 1u);
  EXPECT_FALSE(fs::exists(path));
  EXPECT_TRUE(fs::exists(path.string() + ".corrupt"));
  fs::remove_all(dir);
}

TEST(Cache, KeySensitivity) {
  RunConfig c = small_config();
  const auto k = make_cache_key("geo", "vals", c);
  EXPECT_EQ(k, make_cache_key("geo", "vals", c));
  EXPECT_NE(k, make_cache_key("geo", "valz", c));
  EXPECT_NE(k, make_cache_key("Geo", "vals", c));
  EXPECT_NE(k, make_cache_key("geov", "als", c));
  RunConfig threads = c;
  threads.threads = 7;
  EXPECT_EQ(k, make_cache_key("geo", "vals", threads));
  c.seed = 3;
  EXPECT_NE(k, make_cache_key("geo", "vals", c));
}

TEST(Inspect, Tables) {
  auto rs = run_analysis(noise_dataset(4, 2, 3), small_config());
  const auto global = inspect_table(rs, std::nullopt, std::nullopt);
  EXPECT_NE(global.find("global statistics"), std::string::npos);
  EXPECT_NE(global.find("global-moran"), std::string::npos);
  EXPECT_NE(global.find("2011"), std::string::npos);
  const auto local = inspect_table(rs, std::string("r01c01"), std::string("2010"));
  EXPECT_NE(local.find("local-geary"), std::string::npos);
  EXPECT_NE(local.find("aggregate"), std::string::npos);
  EXPECT_EQ(local.find("2011"), std::string::npos);
  try {
    inspect_table(rs, std::string("ZZZ"), std::nullopt);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_STREQ(e.what(), "unknown location ZZZ");
  }
  EXPECT_THROW(inspect_table(rs, std::nullopt, std::string("1999")), InputError);
}

TEST(RunAnalysis, NullRejectionMatchesFoldedPValue) {
  // Exchangeable noise: P(p* <= 0.05) = 100/1000 for M = 999 because p* folds both tails.
  RunConfig c;
  c.methods = {StatKind::LocalMoran};
  std::size_t rejected = 0, tested = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    c.seed = seed;
    const auto series = synthetic::GridSeries{synthetic::noise_with_block(20, 20, 100 + seed, 0, 0, 0, 0.0)};
    const auto rs = run_analysis(synthetic::grid_dataset(20, 20, {"0"}, series), c);
    for (const auto& cell : rs.per_timestep[0].local[0]) {
      ++tested;
      rejected += *cell.pseudo_p <= 0.05;
    }
  }
  const double fraction = static_cast<double>(rejected) / static_cast<double>(tested);
  EXPECT_GT(fraction, 0.08);
  EXPECT_LT(fraction, 0.12);
}
