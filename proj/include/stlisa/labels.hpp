#pragma once

// Categorical cluster labels from statistic values and their significance.

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "stlisa/error.hpp"
#include "stlisa/permutation.hpp"
#include "stlisa/statistics.hpp"

namespace stlisa {

enum class ClusterLabel {
  HighHigh,
  LowLow,
  HighLow,
  LowHigh,
  OtherPositive,
  NegativeSA,
  HotSpot,
  ColdSpot,
  NotSignificant,
  NoData,
  NoNeighbors,
};

enum class GlobalLabel { PositiveSA, NegativeSA, HighClustering, LowClustering, NotSignificant };

inline constexpr std::array<std::pair<ClusterLabel, std::string_view>, 11> kClusterLabelNames{{
    {ClusterLabel::HighHigh, "high-high"},
    {ClusterLabel::LowLow, "low-low"},
    {ClusterLabel::HighLow, "high-low"},
    {ClusterLabel::LowHigh, "low-high"},
    {ClusterLabel::OtherPositive, "other-positive"},
    {ClusterLabel::NegativeSA, "negative-sa"},
    {ClusterLabel::HotSpot, "hot-spot"},
    {ClusterLabel::ColdSpot, "cold-spot"},
    {ClusterLabel::NotSignificant, "not-significant"},
    {ClusterLabel::NoData, "no-data"},
    {ClusterLabel::NoNeighbors, "no-neighbors"},
}};

inline constexpr std::array<std::pair<GlobalLabel, std::string_view>, 5> kGlobalLabelNames{{
    {GlobalLabel::PositiveSA, "positive-sa"},
    {GlobalLabel::NegativeSA, "negative-sa"},
    {GlobalLabel::HighClustering, "high-clustering"},
    {GlobalLabel::LowClustering, "low-clustering"},
    {GlobalLabel::NotSignificant, "not-significant"},
}};

inline std::string to_string(ClusterLabel l) {
  for (const auto& [k, v] : kClusterLabelNames) {
    if (k == l) return std::string(v);
  }
  return "?";
}

inline std::string to_string(GlobalLabel l) {
  for (const auto& [k, v] : kGlobalLabelNames) {
    if (k == l) return std::string(v);
  }
  return "?";
}

inline ClusterLabel parse_cluster_label(std::string_view s) {
  for (const auto& [k, v] : kClusterLabelNames) {
    if (v == s) return k;
  }
  throw InputError("unknown cluster label '" + std::string(s) + "'");
}

inline GlobalLabel parse_global_label(std::string_view s) {
  for (const auto& [k, v] : kGlobalLabelNames) {
    if (v == s) return k;
  }
  throw InputError("unknown global label '" + std::string(s) + "'");
}

/// Which side of the permutation distribution an observed value falls on.
enum class Tail { None, Low, High };

/// Significance is decided by the cutoff interval; the pseudo p-value is
/// reported but not consulted, so labels never disagree with the cutoffs.
inline Tail tail_of(double value, double lower, double upper) {
  if (value < lower) return Tail::Low;
  if (value > upper) return Tail::High;
  return Tail::None;
}

inline Tail tail_of(const PermutationDistribution& d) { return tail_of(d.observed, d.lower_cutoff, d.upper_cutoff); }

/// Pseudo-p based significance, for callers that have no cutoffs.
inline bool significant_by_p(double pseudo_p, double alpha) { return pseudo_p <= alpha; }

namespace detail {

// Exact zeros count as High.
inline bool is_high(double x) { return x >= 0.0; }

}  // namespace detail

/// Quadrant of a significant Local Moran value: clusters for I > 0, outliers
/// for I < 0. A sign pattern at odds with I's sign throws.
inline ClusterLabel assign_local_moran(double value, bool significant, double z, double lag) {
  if (!significant) return ClusterLabel::NotSignificant;
  const bool hz = detail::is_high(z);
  const bool hl = detail::is_high(lag);
  const ClusterLabel quadrant = hz ? (hl ? ClusterLabel::HighHigh : ClusterLabel::HighLow)
                                   : (hl ? ClusterLabel::LowHigh : ClusterLabel::LowLow);
  const bool cluster = quadrant == ClusterLabel::HighHigh || quadrant == ClusterLabel::LowLow;
  if ((value > 0.0 && !cluster) || (value < 0.0 && cluster)) {
    throw ComputeError("inconsistent quadrant");
  }
  return quadrant;
}

inline ClusterLabel assign_local_moran(double value, double pseudo_p, double z, double lag, double alpha) {
  return assign_local_moran(value, significant_by_p(pseudo_p, alpha), z, lag);
}

/// Low values mean positive autocorrelation (refined by quadrant when the
/// signs agree); high values mean negative autocorrelation.
inline ClusterLabel assign_local_geary(Tail tail, double z, double lag) {
  switch (tail) {
    case Tail::None: return ClusterLabel::NotSignificant;
    case Tail::High: return ClusterLabel::NegativeSA;
    case Tail::Low:
      if (z > 0.0 && lag > 0.0) return ClusterLabel::HighHigh;
      if (z < 0.0 && lag < 0.0) return ClusterLabel::LowLow;
      return ClusterLabel::OtherPositive;
  }
  return ClusterLabel::NotSignificant;
}

inline ClusterLabel assign_local_geary(double value, double lower, double upper, double z, double lag) {
  return assign_local_geary(tail_of(value, lower, upper), z, lag);
}

/// High Gi / Gi* marks a hot spot, low marks a cold spot.
inline ClusterLabel assign_gi(Tail tail) {
  switch (tail) {
    case Tail::High: return ClusterLabel::HotSpot;
    case Tail::Low: return ClusterLabel::ColdSpot;
    case Tail::None: return ClusterLabel::NotSignificant;
  }
  return ClusterLabel::NotSignificant;
}

inline ClusterLabel assign_gi(double value, double lower, double upper) {
  return assign_gi(tail_of(value, lower, upper));
}

inline GlobalLabel assign_global(StatKind kind, double value, double lower, double upper) {
  if (is_local(kind)) throw InputError(to_string(kind) + " is not a global statistic");
  const Tail tail = tail_of(value, lower, upper);
  if (tail == Tail::None) return GlobalLabel::NotSignificant;
  switch (kind) {
    case StatKind::GlobalMoran:
      return tail == Tail::High ? GlobalLabel::PositiveSA : GlobalLabel::NegativeSA;
    case StatKind::GlobalGeary:
      return tail == Tail::Low ? GlobalLabel::PositiveSA : GlobalLabel::NegativeSA;
    case StatKind::GeneralG:
      return tail == Tail::High ? GlobalLabel::HighClustering : GlobalLabel::LowClustering;
    default:
      throw InputError(to_string(kind) + " is not a global statistic");
  }
}

/// Labels a method may emit (NoData and NoNeighbors are always allowed).
inline bool is_legal_label(StatKind kind, ClusterLabel l) {
  if (l == ClusterLabel::NoData || l == ClusterLabel::NoNeighbors || l == ClusterLabel::NotSignificant) return true;
  switch (kind) {
    case StatKind::LocalMoran:
      return l == ClusterLabel::HighHigh || l == ClusterLabel::LowLow || l == ClusterLabel::HighLow ||
             l == ClusterLabel::LowHigh;
    case StatKind::LocalGeary:
      return l == ClusterLabel::HighHigh || l == ClusterLabel::LowLow || l == ClusterLabel::OtherPositive ||
             l == ClusterLabel::NegativeSA;
    case StatKind::GiStar:
    case StatKind::Gi:
      return l == ClusterLabel::HotSpot || l == ClusterLabel::ColdSpot;
    default:
      return false;
  }
}

}  // namespace stlisa
