#pragma once

// Permutation inference: empirical distributions, pseudo p-values,
// significance cutoffs and permutation-normalized statistics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stlisa/error.hpp"
#include "stlisa/rng.hpp"
#include "stlisa/spatial_weights.hpp"
#include "stlisa/statistics.hpp"

namespace stlisa {

inline constexpr std::size_t kDefaultPermutations = 999;
inline constexpr std::size_t kMinPermutations = 19;

struct InferenceParams {
  std::size_t permutations = kDefaultPermutations;
  double alpha = 0.05;
  RngPolicy rng;
};

struct PermutationDistribution {
  std::size_t permutations = 0;
  std::vector<double> sorted_values;  // ascending
  double observed = 0.0;
  double pseudo_p = 1.0;
  double lower_cutoff = 0.0;
  double upper_cutoff = 0.0;
  std::optional<double> znorm;  // unset when the permuted values are all equal

  /// Outside the closed cutoff interval.
  bool significant() const { return observed < lower_cutoff || observed > upper_cutoff; }
};

/// Two-sided pseudo p-value from the count of permuted values strictly above v:
/// R = min(above, M - above), p = (R + 1) / (M + 1).
inline double pseudo_p_from_count(std::size_t above, std::size_t permutations) {
  const std::size_t r = std::min(above, permutations - above);
  return static_cast<double>(r + 1) / static_cast<double>(permutations + 1);
}

inline double pseudo_p(std::span<const double> permuted, double observed) {
  if (permuted.empty()) throw InputError("pseudo p-value needs at least one permuted value");
  const auto above = static_cast<std::size_t>(
      std::count_if(permuted.begin(), permuted.end(), [observed](double s) { return s > observed; }));
  return pseudo_p_from_count(above, permuted.size());
}

/// floor(alpha * (M + 1) - 1); the 1-based rank of the lower cutoff.
inline std::size_t cutoff_rank(double alpha, std::size_t permutations) {
  // The epsilon absorbs representation error in products like 0.05 * 1000.
  const double raw = std::floor(alpha * static_cast<double>(permutations + 1) - 1.0 + 1e-9);
  if (raw < 1.0) throw InputError("insufficient permutations for requested cutoff");
  return static_cast<std::size_t>(raw);
}

/// (S'[R], S'[M - R]) with S' sorted ascending and 1-based.
inline std::pair<double, double> significance_cutoffs(std::span<const double> sorted, double alpha) {
  const std::size_t m = sorted.size();
  const std::size_t r = cutoff_rank(alpha, m);
  if (r > m - r) throw InputError("cutoff rank exceeds half the permutation count");
  return {sorted[r - 1], sorted[m - r - 1]};
}

/// (v - mean(S)) / population-std(S).
inline double znorm_statistic(std::span<const double> permuted, double observed) {
  if (permuted.empty()) throw ComputeError("degenerate permutation distribution");
  double sum = 0.0;
  for (double s : permuted) sum += s;
  const double mean = sum / static_cast<double>(permuted.size());
  double ss = 0.0;
  for (double s : permuted) ss += (s - mean) * (s - mean);
  const double sd = std::sqrt(ss / static_cast<double>(permuted.size()));
  if (!(sd > 0.0)) throw ComputeError("degenerate permutation distribution");
  return (observed - mean) / sd;
}

/// k evenly spaced order statistics of an ascending sequence, min and max included.
inline std::vector<double> distribution_sketch(std::span<const double> sorted, std::size_t k) {
  const std::size_t m = sorted.size();
  if (k < 3 || k > m) throw InputError("sketch size must lie in [3, permutation count]");
  std::vector<double> out(k);
  for (std::size_t q = 0; q < k; ++q) {
    // round(q * (m - 1) / (k - 1)), half up
    const std::size_t idx = (q * (m - 1) * 2 + (k - 1)) / (2 * (k - 1));
    out[q] = sorted[idx];
  }
  return out;
}

inline PermutationDistribution summarize_permutations(std::vector<double> permuted, double observed, double alpha) {
  PermutationDistribution d;
  d.permutations = permuted.size();
  d.observed = observed;
  d.pseudo_p = pseudo_p(permuted, observed);
  try {
    d.znorm = znorm_statistic(permuted, observed);
  } catch (const ComputeError&) {
    d.znorm.reset();
  }
  std::sort(permuted.begin(), permuted.end());
  d.sorted_values = std::move(permuted);
  std::tie(d.lower_cutoff, d.upper_cutoff) = significance_cutoffs(d.sorted_values, alpha);
  return d;
}

namespace detail {

inline void check_params(const InferenceParams& p) {
  if (p.permutations < kMinPermutations) {
    throw InputError("at least " + std::to_string(kMinPermutations) + " permutations are required");
  }
  if (!(p.alpha > 0.0 && p.alpha <= 0.5)) throw InputError("alpha must lie in (0, 0.5]");
  (void)cutoff_rank(p.alpha, p.permutations);
}

inline void check_weights(StatKind kind, const WeightMatrix& w) {
  if (needs_self_weights(kind) != w.self_included()) {
    throw InputError(to_string(kind) + (needs_self_weights(kind) ? " needs a self-included weight matrix"
                                                                  : " needs a self-excluded weight matrix"));
  }
}

}  // namespace detail

/// Shuffles every value across all locations M times and recomputes the statistic.
inline PermutationDistribution permute_global(StatKind kind, const WeightMatrix& w, std::span<const double> z,
                                              const InferenceParams& params, std::uint64_t timestep) {
  if (is_local(kind)) throw InputError(to_string(kind) + " is not a global statistic");
  detail::check_params(params);
  detail::check_weights(kind, w);
  const double observed = evaluate_global(kind, w, z);

  std::vector<double> permuted(params.permutations);
  std::vector<double> buffer(z.size());
  for (std::size_t p = 0; p < params.permutations; ++p) {
    std::copy(z.begin(), z.end(), buffer.begin());
    auto rng = params.rng.substream(timestep, RngPolicy::kGlobal, p);
    shuffle(std::span<double>(buffer), rng);
    permuted[p] = evaluate_global(kind, w, buffer);
  }
  return summarize_permutations(std::move(permuted), observed, params.alpha);
}

/// Conditional permutation: the focal value stays put and all other values are
/// shuffled over the remaining locations. Only the positions inside the focal
/// row influence the statistic, so the shuffle is realized as a uniform
/// ordered draw of the row's neighbor slots from the non-focal values.
/// `stream_location` names the RNG substream; it defaults to `focal` and lets
/// callers working on a compacted problem keep the original location index.
inline PermutationDistribution permute_local(StatKind kind, const WeightMatrix& w, std::span<const double> z,
                                             std::size_t focal, const InferenceParams& params,
                                             std::uint64_t timestep,
                                             std::optional<std::uint64_t> stream_location = std::nullopt) {
  if (!is_local(kind)) throw InputError(to_string(kind) + " is not a local statistic");
  detail::check_params(params);
  detail::check_weights(kind, w);
  detail::require_size(w, z);
  if (focal >= z.size()) throw InputError("focal location out of range");
  if (!w.has_neighbors(focal)) throw ComputeError("no neighbors");
  const std::size_t n = z.size();
  if (n < 3) throw ComputeError("conditional permutation needs at least 3 locations");

  const auto row = w.row(focal);
  const double z_focal = z[focal];

  double mean_excl = 0.0;
  double std_excl = 0.0;
  if (kind == StatKind::Gi) std::tie(mean_excl, std_excl) = leave_one_out_moments(z, focal);

  std::vector<double> vals(row.size());
  auto evaluate = [&]() -> LocalStat {
    switch (kind) {
      case StatKind::LocalMoran:
        return {kernel::local_moran(z_focal, kernel::weighted_sum(row, vals), n), LocalStatus::Ok};
      case StatKind::LocalGeary:
        return {kernel::local_geary(row, z_focal, vals), LocalStatus::Ok};
      case StatKind::GiStar:
        return kernel::gi_star(row, vals, n);
      case StatKind::Gi:
        return kernel::gi(row, vals, n, mean_excl, std_excl);
      default:
        throw InputError("unreachable");
    }
  };

  for (std::size_t k = 0; k < row.size(); ++k) vals[k] = z[row[k].col];
  if (kind == StatKind::Gi && !(std_excl > 0.0)) throw ComputeError("degenerate leave-one-out variance");
  const LocalStat observed = evaluate();
  if (!observed.ok()) {
    throw ComputeError(kind == StatKind::GiStar ? "degenerate Gi* denominator" : "degenerate Gi denominator");
  }

  std::vector<double> pool;
  pool.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (j != focal) pool.push_back(z[j]);
  }
  std::size_t slots = 0;
  for (const auto& e : row) slots += e.col != focal;

  const std::uint64_t stream = stream_location.value_or(focal);
  std::vector<std::size_t> swaps(slots);
  std::vector<double> permuted(params.permutations);
  for (std::size_t p = 0; p < params.permutations; ++p) {
    auto rng = params.rng.substream(timestep, stream, p);
    partial_shuffle(std::span<double>(pool), slots, rng, std::span<std::size_t>(swaps));
    std::size_t slot = 0;
    for (std::size_t k = 0; k < row.size(); ++k) vals[k] = row[k].col == focal ? z_focal : pool[slot++];
    permuted[p] = evaluate().value;
    undo_partial_shuffle(std::span<double>(pool), slots, std::span<const std::size_t>(swaps));
  }
  return summarize_permutations(std::move(permuted), observed.value, params.alpha);
}

}  // namespace stlisa
