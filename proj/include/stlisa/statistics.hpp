#pragma once

// Global and local spatial association statistics on z-scored values.
//
// All functions take a compacted problem: `z` holds one z-score per present
// location (no gaps) and the weight matrix is indexed the same way. `n` is
// z.size(). Local results carry an explicit status instead of NaN.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "stlisa/error.hpp"
#include "stlisa/spatial_weights.hpp"

namespace stlisa {

enum class StatKind { GlobalMoran, LocalMoran, GlobalGeary, LocalGeary, GeneralG, GiStar, Gi };

constexpr bool is_local(StatKind k) {
  return k == StatKind::LocalMoran || k == StatKind::LocalGeary || k == StatKind::GiStar || k == StatKind::Gi;
}

constexpr bool needs_self_weights(StatKind k) { return k == StatKind::GiStar; }

inline std::string to_string(StatKind k) {
  switch (k) {
    case StatKind::GlobalMoran: return "global-moran";
    case StatKind::LocalMoran: return "local-moran";
    case StatKind::GlobalGeary: return "global-geary";
    case StatKind::LocalGeary: return "local-geary";
    case StatKind::GeneralG: return "general-g";
    case StatKind::GiStar: return "gi-star";
    case StatKind::Gi: return "gi";
  }
  return "?";
}

enum class LocalStatus { Ok, NoNeighbors, Degenerate };

struct LocalStat {
  double value = 0.0;
  LocalStatus status = LocalStatus::Ok;

  bool ok() const { return status == LocalStatus::Ok; }
  static LocalStat no_neighbors() { return {0.0, LocalStatus::NoNeighbors}; }
  static LocalStat degenerate() { return {0.0, LocalStatus::Degenerate}; }
};

/// Per-location quantities shared by the local statistics.
struct LocalContext {
  double z = 0.0;
  LocalStat lag;
  double mean_excl = 0.0;  // mean of z without location i
  double std_excl = 0.0;   // population std of z without location i
};

namespace kernel {

// These evaluate one focal location from its weight row and the values that
// sit at each row entry. The permutation engine feeds them shuffled values.

using Row = std::span<const WeightMatrix::Entry>;

inline double weighted_sum(Row row, std::span<const double> vals) {
  double s = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) s += row[k].weight * vals[k];
  return s;
}

inline double local_moran(double z_i, double lag, std::size_t n) {
  return z_i * lag / static_cast<double>(n - 1);
}

inline double local_geary(Row row, double z_i, std::span<const double> vals) {
  double s = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    const double d = z_i - vals[k];
    s += row[k].weight * d * d;
  }
  return s;
}

/// sqrt((n * sum_j w_ij^2 - 1) / (n - 1)); nullopt when the radicand is not positive.
inline std::optional<double> getis_scale(Row row, std::size_t n) {
  double sq = 0.0;
  for (const auto& e : row) sq += e.weight * e.weight;
  const double radicand = (static_cast<double>(n) * sq - 1.0) / static_cast<double>(n - 1);
  if (!(radicand > 0.0)) return std::nullopt;
  return std::sqrt(radicand);
}

inline LocalStat gi_star(Row row, std::span<const double> vals, std::size_t n) {
  auto scale = getis_scale(row, n);
  if (!scale) return LocalStat::degenerate();
  return {weighted_sum(row, vals) / *scale, LocalStatus::Ok};
}

inline LocalStat gi(Row row, std::span<const double> vals, std::size_t n, double mean_excl, double std_excl) {
  auto scale = getis_scale(row, n);
  if (!scale || !(std_excl > 0.0)) return LocalStat::degenerate();
  return {(weighted_sum(row, vals) - mean_excl) / (std_excl * *scale), LocalStatus::Ok};
}

}  // namespace kernel

namespace detail {

inline void require_self_excluded(const WeightMatrix& w, const char* what) {
  if (w.self_included()) throw InputError(std::string(what) + " requires a self-excluded weight matrix");
}

inline void require_size(const WeightMatrix& w, std::span<const double> z) {
  if (w.size() != z.size()) throw InputError("weight matrix and value vector sizes differ");
}

inline std::vector<double> row_values(kernel::Row row, std::span<const double> z) {
  std::vector<double> vals(row.size());
  for (std::size_t k = 0; k < row.size(); ++k) vals[k] = z[row[k].col];
  return vals;
}

}  // namespace detail

/// Leave-one-out mean and population standard deviation of z without index i.
inline std::pair<double, double> leave_one_out_moments(std::span<const double> z, std::size_t i) {
  const std::size_t m = z.size() - 1;
  double sum = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (j != i) sum += z[j];
  }
  const double mean = sum / static_cast<double>(m);
  double ss = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (j != i) ss += (z[j] - mean) * (z[j] - mean);
  }
  return {mean, std::sqrt(ss / static_cast<double>(m))};
}

/// lag_i = sum_j W_ij z_j.
inline std::vector<LocalStat> spatial_lag(const WeightMatrix& w, std::span<const double> z) {
  detail::require_size(w, z);
  detail::require_self_excluded(w, "spatial lag");
  std::vector<LocalStat> lag(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (w.row_empty(i)) {
      lag[i] = LocalStat::no_neighbors();
      continue;
    }
    double s = 0.0;
    for (const auto& e : w.row(i)) s += e.weight * z[e.col];
    lag[i] = {s, LocalStatus::Ok};
  }
  return lag;
}

inline LocalContext local_context(const WeightMatrix& w, std::span<const double> z, std::size_t i) {
  detail::require_size(w, z);
  detail::require_self_excluded(w, "local context");
  LocalContext ctx;
  ctx.z = z[i];
  if (w.row_empty(i)) {
    ctx.lag = LocalStat::no_neighbors();
  } else {
    auto row = w.row(i);
    ctx.lag = {kernel::weighted_sum(row, detail::row_values(row, z)), LocalStatus::Ok};
  }
  if (z.size() >= 2) std::tie(ctx.mean_excl, ctx.std_excl) = leave_one_out_moments(z, i);
  return ctx;
}

inline double global_moran(const WeightMatrix& w, std::span<const double> z) {
  detail::require_size(w, z);
  detail::require_self_excluded(w, "global Moran's I");
  if (z.size() < 2) throw ComputeError("global Moran's I needs at least 2 locations");
  if (w.nonzeros() == 0) throw ComputeError("no spatial structure");
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    double lag = 0.0;
    for (const auto& e : w.row(i)) lag += e.weight * z[e.col];
    s += z[i] * lag;
  }
  return s / static_cast<double>(z.size() - 1);
}

inline std::vector<LocalStat> local_moran(const WeightMatrix& w, std::span<const double> z) {
  if (z.size() < 2) throw ComputeError("local Moran's I needs at least 2 locations");
  auto lag = spatial_lag(w, z);
  std::vector<LocalStat> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = lag[i].ok() ? LocalStat{kernel::local_moran(z[i], lag[i].value, z.size()), LocalStatus::Ok}
                         : LocalStat::no_neighbors();
  }
  return out;
}

/// Squared-difference form: sum_i sum_j W_ij (z_i - z_j)^2 / (2n).
inline double global_geary(const WeightMatrix& w, std::span<const double> z) {
  detail::require_size(w, z);
  detail::require_self_excluded(w, "global Geary's C");
  if (z.size() < 2) throw ComputeError("global Geary's C needs at least 2 locations");
  if (w.nonzeros() == 0) throw ComputeError("no spatial structure");
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    for (const auto& e : w.row(i)) {
      const double d = z[i] - z[e.col];
      s += e.weight * d * d;
    }
  }
  return s / (2.0 * static_cast<double>(z.size()));
}

inline std::vector<LocalStat> local_geary(const WeightMatrix& w, std::span<const double> z) {
  detail::require_size(w, z);
  detail::require_self_excluded(w, "local Geary's C");
  std::vector<LocalStat> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (w.row_empty(i)) {
      out[i] = LocalStat::no_neighbors();
      continue;
    }
    auto row = w.row(i);
    out[i] = {kernel::local_geary(row, z[i], detail::row_values(row, z)), LocalStatus::Ok};
  }
  return out;
}

/// Ratio of weighted to unweighted cross products over j != i.
inline double general_g(const WeightMatrix& w, std::span<const double> z) {
  detail::require_size(w, z);
  detail::require_self_excluded(w, "General G");
  if (z.size() < 3) throw ComputeError("General G needs at least 3 locations");
  if (w.nonzeros() == 0) throw ComputeError("no spatial structure");
  double num = 0.0;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    for (const auto& e : w.row(i)) num += e.weight * z[i] * z[e.col];
    sum += z[i];
    sum_sq += z[i] * z[i];
  }
  // sum_i sum_{j != i} z_i z_j
  const double den = sum * sum - sum_sq;
  if (std::abs(den) < 1e-12) throw ComputeError("undefined General G");
  return num / den;
}

inline std::vector<LocalStat> gi_star(const WeightMatrix& wstar, std::span<const double> z) {
  detail::require_size(wstar, z);
  if (!wstar.self_included()) throw InputError("Gi* requires a self-included weight matrix");
  if (z.size() < 3) throw ComputeError("Gi* needs at least 3 locations");
  std::vector<LocalStat> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!wstar.has_neighbors(i)) {
      out[i] = LocalStat::no_neighbors();
      continue;
    }
    auto row = wstar.row(i);
    out[i] = kernel::gi_star(row, detail::row_values(row, z), z.size());
  }
  return out;
}

inline std::vector<LocalStat> gi(const WeightMatrix& w, std::span<const double> z) {
  detail::require_size(w, z);
  detail::require_self_excluded(w, "Gi");
  if (z.size() < 3) throw ComputeError("Gi needs at least 3 locations");
  std::vector<LocalStat> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (w.row_empty(i)) {
      out[i] = LocalStat::no_neighbors();
      continue;
    }
    auto row = w.row(i);
    auto [mean, sd] = leave_one_out_moments(z, i);
    out[i] = kernel::gi(row, detail::row_values(row, z), z.size(), mean, sd);
  }
  return out;
}

inline double evaluate_global(StatKind kind, const WeightMatrix& w, std::span<const double> z) {
  switch (kind) {
    case StatKind::GlobalMoran: return global_moran(w, z);
    case StatKind::GlobalGeary: return global_geary(w, z);
    case StatKind::GeneralG: return general_g(w, z);
    default: throw InputError(to_string(kind) + " is not a global statistic");
  }
}

inline std::vector<LocalStat> evaluate_local(StatKind kind, const WeightMatrix& w, std::span<const double> z) {
  switch (kind) {
    case StatKind::LocalMoran: return local_moran(w, z);
    case StatKind::LocalGeary: return local_geary(w, z);
    case StatKind::GiStar: return gi_star(w, z);
    case StatKind::Gi: return gi(w, z);
    default: throw InputError(to_string(kind) + " is not a local statistic");
  }
}

}  // namespace stlisa
