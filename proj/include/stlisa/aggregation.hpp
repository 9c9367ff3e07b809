#pragma once

// Cross-method agreement: collapses the labels every enabled method assigned
// to one (location, timestep) into a core group and a single color.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stlisa/error.hpp"
#include "stlisa/labels.hpp"

namespace stlisa {

enum class Membership { High, Low, Neutral, Other };

enum class CoreGroup { HighCluster, LowCluster, MajorConflict, MinorConflict, OtherOnly, NoneSignificant, NoData };

inline std::string to_string(CoreGroup g) {
  switch (g) {
    case CoreGroup::HighCluster: return "high-cluster";
    case CoreGroup::LowCluster: return "low-cluster";
    case CoreGroup::MajorConflict: return "major-conflict";
    case CoreGroup::MinorConflict: return "minor-conflict";
    case CoreGroup::OtherOnly: return "other-only";
    case CoreGroup::NoneSignificant: return "not-significant";
    case CoreGroup::NoData: return "no-data";
  }
  return "?";
}

inline CoreGroup parse_core_group(std::string_view s) {
  for (auto g : {CoreGroup::HighCluster, CoreGroup::LowCluster, CoreGroup::MajorConflict, CoreGroup::MinorConflict,
                 CoreGroup::OtherOnly, CoreGroup::NoneSignificant, CoreGroup::NoData}) {
    if (to_string(g) == s) return g;
  }
  throw InputError("unknown core group '" + std::string(s) + "'");
}

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  bool operator==(const Rgb&) const = default;
};

/// "#rrggbb", lowercase.
inline std::string to_hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

inline Rgb parse_hex(std::string_view s) {
  auto nibble = [&](char ch) -> int {
    if (ch >= '0' && ch <= '9') return ch - '0';
    if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
    if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
    throw InputError("bad hex color '" + std::string(s) + "'");
  };
  if (s.size() != 7 || s[0] != '#') throw InputError("bad hex color '" + std::string(s) + "'");
  auto byte = [&](std::size_t i) { return static_cast<std::uint8_t>(nibble(s[i]) * 16 + nibble(s[i + 1])); };
  return {byte(1), byte(3), byte(5)};
}

struct PaletteConfig {
  Rgb high_cluster{178, 24, 43};
  Rgb low_cluster{33, 102, 172};
  Rgb not_significant{224, 224, 224};
  Rgb major_conflict{84, 39, 136};
  Rgb minor_conflict{153, 112, 171};
  Rgb other_only{254, 224, 139};
  Rgb no_data{250, 250, 250};

  Rgb core_color(CoreGroup g) const {
    switch (g) {
      case CoreGroup::HighCluster: return high_cluster;
      case CoreGroup::LowCluster: return low_cluster;
      case CoreGroup::MajorConflict: return major_conflict;
      case CoreGroup::MinorConflict: return minor_conflict;
      case CoreGroup::OtherOnly: return other_only;
      case CoreGroup::NoneSignificant: return not_significant;
      case CoreGroup::NoData: return no_data;
    }
    return no_data;
  }
};

struct AggregateAssignment {
  CoreGroup core = CoreGroup::NoData;
  double h = 0.0;
  Rgb color;
  std::vector<ClusterLabel> labels;
};

inline Membership high_low_membership(ClusterLabel l) {
  switch (l) {
    case ClusterLabel::HighHigh:
    case ClusterLabel::HotSpot:
      return Membership::High;
    case ClusterLabel::LowLow:
    case ClusterLabel::ColdSpot:
      return Membership::Low;
    case ClusterLabel::NotSignificant:
    case ClusterLabel::NoData:
    case ClusterLabel::NoNeighbors:
      return Membership::Neutral;
    case ClusterLabel::HighLow:
    case ClusterLabel::LowHigh:
    case ClusterLabel::OtherPositive:
    case ClusterLabel::NegativeSA:
      return Membership::Other;
  }
  return Membership::Neutral;
}

inline CoreGroup core_group(std::span<const ClusterLabel> labels) {
  if (labels.empty()) throw InputError("core group needs at least one label");
  bool high = false, low = false, other = false, all_no_data = true;
  bool low_high = false, high_low = false;
  for (auto l : labels) {
    switch (high_low_membership(l)) {
      case Membership::High: high = true; break;
      case Membership::Low: low = true; break;
      case Membership::Other: other = true; break;
      case Membership::Neutral: break;
    }
    all_no_data = all_no_data && l == ClusterLabel::NoData;
    low_high = low_high || l == ClusterLabel::LowHigh;
    high_low = high_low || l == ClusterLabel::HighLow;
  }
  if (all_no_data) return CoreGroup::NoData;
  if (high && low) return CoreGroup::MajorConflict;
  if ((high && low_high) || (low && high_low)) return CoreGroup::MinorConflict;
  if (high) return CoreGroup::HighCluster;
  if (low) return CoreGroup::LowCluster;
  if (other) return CoreGroup::OtherOnly;
  return CoreGroup::NoneSignificant;
}

/// 0 for in-group labels, 0.5 for other-positive, 1 for non-conflicting
/// contradictory labels. Conflicting labels violate the contract.
inline double disagreement(CoreGroup core, ClusterLabel l) {
  if (core != CoreGroup::HighCluster && core != CoreGroup::LowCluster) {
    throw InputError("disagreement is defined for high/low cluster cores only");
  }
  const bool high_core = core == CoreGroup::HighCluster;
  const Membership m = high_low_membership(l);
  if ((high_core && m == Membership::High) || (!high_core && m == Membership::Low)) return 0.0;
  if (m == Membership::High || m == Membership::Low || (high_core && l == ClusterLabel::LowHigh) ||
      (!high_core && l == ClusterLabel::HighLow)) {
    throw InputError("label " + to_string(l) + " conflicts with core group " + to_string(core));
  }
  if (l == ClusterLabel::OtherPositive) return 0.5;
  return 1.0;
}

/// Per-channel linear mix from `from` toward `to`, rounded at the end.
inline Rgb interpolate(Rgb from, Rgb to, double t) {
  auto mix = [t](std::uint8_t a, std::uint8_t b) {
    const double v = static_cast<double>(a) + t * (static_cast<double>(b) - static_cast<double>(a));
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
  };
  return {mix(from.r, to.r), mix(from.g, to.g), mix(from.b, to.b)};
}

/// High/low cores fade toward the not-significant grey by the mean
/// disagreement h; conflicts and the remaining groups get fixed colors.
inline AggregateAssignment aggregate_color(std::span<const ClusterLabel> labels, const PaletteConfig& palette = {}) {
  AggregateAssignment out;
  out.core = core_group(labels);
  out.labels.assign(labels.begin(), labels.end());
  if (out.core == CoreGroup::HighCluster || out.core == CoreGroup::LowCluster) {
    double sum = 0.0;
    for (auto l : labels) sum += disagreement(out.core, l);
    out.h = sum / static_cast<double>(labels.size());
    out.color = interpolate(palette.core_color(out.core), palette.not_significant, out.h);
  } else {
    out.color = palette.core_color(out.core);
  }
  return out;
}

}  // namespace stlisa
