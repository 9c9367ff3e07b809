#pragma once

// End-to-end analysis: for every timestep, global and local statistics with
// permutation inference, cluster labels, and the cross-method aggregate.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stlisa/aggregation.hpp"
#include "stlisa/data_model.hpp"
#include "stlisa/digest.hpp"
#include "stlisa/labels.hpp"
#include "stlisa/parallel.hpp"
#include "stlisa/permutation.hpp"
#include "stlisa/results.hpp"
#include "stlisa/spatial_weights.hpp"
#include "stlisa/statistics.hpp"

namespace stlisa {

/// Content digest over ids, names, timesteps and raw values.
inline std::string dataset_digest(const Dataset& ds) {
  Sha256 h;
  h.field("stlisa-dataset-v1");
  for (const auto& a : ds.areas().areas()) {
    h.field(a.id);
    h.field(a.name ? "1" + *a.name : "0");
  }
  for (std::size_t t = 0; t < ds.n_timesteps(); ++t) {
    h.field(ds.timesteps()[t]);
    for (const auto& v : ds.values(t)) h.field(v ? nlohmann::json(*v).dump() : "null");
  }
  return h.hex();
}

namespace detail {

/// One timestep reduced to its present locations.
struct TimestepProblem {
  std::size_t timestep = 0;
  std::vector<std::size_t> original;  // compact index -> location index
  std::vector<double> z;
  WeightMatrix w;
  WeightMatrix wstar;
};

inline MethodResult empty_cell(std::string statistic, ClusterLabel label) {
  MethodResult r;
  r.statistic = std::move(statistic);
  r.label = to_string(label);
  return r;
}

inline MethodResult fill_cell(std::string statistic, const PermutationDistribution& d, std::string label,
                              std::optional<std::size_t> sketch_size) {
  MethodResult r;
  r.statistic = std::move(statistic);
  r.value = d.observed;
  r.znorm = d.znorm;
  r.pseudo_p = d.pseudo_p;
  r.lower = d.lower_cutoff;
  r.upper = d.upper_cutoff;
  r.label = std::move(label);
  if (sketch_size) r.sketch = distribution_sketch(d.sorted_values, std::min(*sketch_size, d.permutations));
  return r;
}

struct LocalOutcome {
  std::vector<MethodResult> cells;  // one per method
  std::vector<std::string> warnings;
};

inline LocalOutcome analyze_location(const TimestepProblem& p, std::size_t i, const RunConfig& config,
                                     const InferenceParams& params, const std::string& timestep_label,
                                     const std::string& location_id) {
  LocalOutcome out;
  if (p.w.row_empty(i)) {
    for (auto m : config.methods) out.cells.push_back(empty_cell(to_string(m), ClusterLabel::NoNeighbors));
    return out;
  }
  const LocalContext ctx = local_context(p.w, p.z, i);
  const std::optional<std::size_t> sketch =
      config.store_local_sketches ? std::optional<std::size_t>(config.local_sketch_size) : std::nullopt;

  for (auto m : config.methods) {
    const WeightMatrix& w = needs_self_weights(m) ? p.wstar : p.w;
    try {
      auto d = permute_local(m, w, p.z, i, params, p.timestep, p.original[i]);
      ClusterLabel label = ClusterLabel::NotSignificant;
      const Tail tail = tail_of(d);
      switch (m) {
        case StatKind::LocalMoran:
          label = assign_local_moran(d.observed, tail != Tail::None, ctx.z, ctx.lag.value);
          break;
        case StatKind::LocalGeary:
          label = assign_local_geary(tail, ctx.z, ctx.lag.value);
          break;
        default:
          label = assign_gi(tail);
      }
      out.cells.push_back(fill_cell(to_string(m), d, to_string(label), sketch));
    } catch (const ComputeError& e) {
      out.warnings.push_back("timestep " + timestep_label + ", location " + location_id + ", " + to_string(m) +
                             ": " + e.what());
      out.cells.push_back(empty_cell(to_string(m), ClusterLabel::NotSignificant));
    }
  }
  return out;
}

}  // namespace detail

/// Runs every enabled method over every analyzable timestep. Timesteps that
/// cannot be normalized or have fewer than 3 present locations are skipped
/// with a warning; their cells are marked no-data.
inline ResultSet run_analysis(const Dataset& ds, const RunConfig& config, const PaletteConfig& palette = {}) {
  config.validate();
  const InferenceParams params = config.inference();
  const std::size_t n = ds.n_locations();
  const std::size_t n_methods = config.methods.size();
  const auto globals = config.global_statistics();
  const bool need_star =
      std::find(config.methods.begin(), config.methods.end(), StatKind::GiStar) != config.methods.end();

  ResultSet rs;
  rs.config = config;
  rs.dataset_digest = dataset_digest(ds);
  rs.timesteps = ds.timesteps();
  for (const auto& a : ds.areas().areas()) rs.locations.push_back({a.id, a.name});
  rs.values.assign(n, std::vector<std::optional<double>>(ds.n_timesteps()));
  rs.zvalues.assign(n, std::vector<std::optional<double>>(ds.n_timesteps()));
  for (std::size_t t = 0; t < ds.n_timesteps(); ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      rs.values[i][t] = ds.values(t)[i];
      rs.zvalues[i][t] = ds.zvalues(t)[i];
    }
  }
  rs.warnings = ds.warnings();

  const NeighborGraph graph = build_contiguity(ds.areas(), config.contiguity, config.snap_precision);
  rs.warnings.insert(rs.warnings.end(), graph.warnings.begin(), graph.warnings.end());
  const WeightMatrix w_full = row_normalize(graph, false);
  const WeightMatrix wstar_full = need_star ? row_normalize(graph, true) : WeightMatrix{};

  // Skipped timesteps keep no-data cells throughout.
  rs.per_timestep.resize(ds.n_timesteps());
  for (auto& ts : rs.per_timestep) {
    ts.local.resize(n_methods);
    for (std::size_t m = 0; m < n_methods; ++m) {
      ts.local[m].assign(n, detail::empty_cell(to_string(config.methods[m]), ClusterLabel::NoData));
    }
    ts.aggregate.assign(n, AggregateCell{CoreGroup::NoData, 0.0, palette.no_data});
  }

  std::vector<detail::TimestepProblem> problems;
  std::vector<std::string> skip_reasons;
  for (std::size_t t = 0; t < ds.n_timesteps(); ++t) {
    const auto& norm = ds.norm(t);
    const std::string& label = ds.timesteps()[t];
    if (!norm.ok) {
      rs.warnings.push_back("timestep " + label + " skipped: " + norm.issue);
      skip_reasons.push_back(label + ": " + norm.issue);
      continue;
    }
    std::vector<bool> present(n);
    detail::TimestepProblem p;
    p.timestep = t;
    for (std::size_t i = 0; i < n; ++i) {
      present[i] = ds.zvalues(t)[i].has_value();
      if (present[i]) {
        p.original.push_back(i);
        p.z.push_back(*ds.zvalues(t)[i]);
      }
    }
    if (p.z.size() < 3) {
      rs.warnings.push_back("timestep " + label + " skipped: insufficient data");
      skip_reasons.push_back(label + ": insufficient data");
      continue;
    }
    p.w = compact(restrict_to_present(w_full, present), present);
    if (need_star) p.wstar = compact(restrict_to_present(wstar_full, present), present);
    problems.push_back(std::move(p));
  }
  if (problems.empty()) {
    std::string msg = "no timestep could be analyzed";
    for (const auto& r : skip_reasons) msg += "; " + r;
    throw ComputeError(msg);
  }

  // Global statistics: one work item per (timestep, statistic).
  const std::size_t n_global = problems.size() * globals.size();
  std::vector<MethodResult> global_cells(n_global);
  std::vector<std::string> global_warnings(n_global);
  parallel_for(n_global, config.threads, [&](std::size_t item) {
    const auto& p = problems[item / globals.size()];
    const StatKind kind = globals[item % globals.size()];
    try {
      auto d = permute_global(kind, p.w, p.z, params, p.timestep);
      auto label = assign_global(kind, d.observed, d.lower_cutoff, d.upper_cutoff);
      global_cells[item] = detail::fill_cell(to_string(kind), d, to_string(label), config.global_sketch_size);
    } catch (const ComputeError& e) {
      global_warnings[item] = "timestep " + ds.timesteps()[p.timestep] + ", " + to_string(kind) + ": " + e.what();
      global_cells[item] = detail::empty_cell(to_string(kind), ClusterLabel::NotSignificant);
    }
  });

  // Local statistics: one work item per (timestep, present location).
  std::vector<std::size_t> offsets{0};
  for (const auto& p : problems) offsets.push_back(offsets.back() + p.z.size());
  std::vector<detail::LocalOutcome> local_out(offsets.back());
  parallel_for(offsets.back(), config.threads, [&](std::size_t item) {
    const std::size_t k = static_cast<std::size_t>(std::upper_bound(offsets.begin(), offsets.end(), item) -
                                                   offsets.begin()) - 1;
    const auto& p = problems[k];
    const std::size_t i = item - offsets[k];
    local_out[item] = detail::analyze_location(p, i, config, params, ds.timesteps()[p.timestep],
                                               ds.areas()[p.original[i]].id);
  });

  // Deterministic merge, timestep-major then location-minor.
  std::vector<ClusterLabel> labels(n_methods);
  for (std::size_t k = 0; k < problems.size(); ++k) {
    const auto& p = problems[k];
    auto& ts = rs.per_timestep[p.timestep];
    for (std::size_t g = 0; g < globals.size(); ++g) {
      const std::size_t item = k * globals.size() + g;
      ts.global.push_back(std::move(global_cells[item]));
      if (!global_warnings[item].empty()) rs.warnings.push_back(std::move(global_warnings[item]));
    }
    for (std::size_t i = 0; i < p.z.size(); ++i) {
      auto& outcome = local_out[offsets[k] + i];
      const std::size_t loc = p.original[i];
      for (std::size_t m = 0; m < n_methods; ++m) {
        labels[m] = parse_cluster_label(outcome.cells[m].label);
        ts.local[m][loc] = std::move(outcome.cells[m]);
      }
      for (auto& wmsg : outcome.warnings) rs.warnings.push_back(std::move(wmsg));
      const auto agg = aggregate_color(labels, palette);
      ts.aggregate[loc] = {agg.core, agg.h, agg.color};
    }
  }
  return rs;
}

/// Every (location, timestep, method) cell carries either numbers or an
/// explicit marker label. Returns the number of cells checked.
inline std::size_t check_completeness(const ResultSet& rs) {
  const std::size_t n = rs.locations.size();
  std::size_t cells = 0;
  if (rs.per_timestep.size() != rs.timesteps.size()) throw ComputeError("timestep count mismatch");
  for (std::size_t t = 0; t < rs.per_timestep.size(); ++t) {
    const auto& ts = rs.per_timestep[t];
    if (ts.local.size() != rs.config.methods.size()) throw ComputeError("method count mismatch");
    if (ts.aggregate.size() != n) throw ComputeError("aggregate cell count mismatch");
    for (const auto& cells_m : ts.local) {
      if (cells_m.size() != n) throw ComputeError("location count mismatch");
      for (const auto& c : cells_m) {
        const ClusterLabel l = parse_cluster_label(c.label);
        const bool marker = l == ClusterLabel::NoData || l == ClusterLabel::NoNeighbors;
        if (!marker && l != ClusterLabel::NotSignificant && !c.value) {
          throw ComputeError("significant cell without a value at timestep " + rs.timesteps[t]);
        }
        if (marker && c.value) throw ComputeError("marker cell carries a value at timestep " + rs.timesteps[t]);
        ++cells;
      }
    }
  }
  return cells;
}

}  // namespace stlisa
