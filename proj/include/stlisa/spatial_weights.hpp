#pragma once

// Polygon contiguity and sparse row-normalized weight matrices.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stlisa/data_model.hpp"

namespace stlisa {

enum class Contiguity { Queen, Rook };

inline std::string to_string(Contiguity c) { return c == Contiguity::Queen ? "queen" : "rook"; }

inline Contiguity parse_contiguity(std::string_view s) {
  if (s == "queen") return Contiguity::Queen;
  if (s == "rook") return Contiguity::Rook;
  throw InputError("unknown contiguity rule '" + std::string(s) + "' (expected queen or rook)");
}

/// Symmetric, irreflexive neighbor relation with sorted adjacency lists.
struct NeighborGraph {
  std::vector<std::vector<std::size_t>> adjacency;
  std::vector<std::string> warnings;

  std::size_t size() const { return adjacency.size(); }
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return adjacency[i]; }
};

namespace detail {

struct SnappedVertex {
  std::int64_t x;
  std::int64_t y;
  bool operator==(const SnappedVertex&) const = default;
  auto operator<=>(const SnappedVertex&) const = default;
};

struct SnappedEdge {
  SnappedVertex a;
  SnappedVertex b;
  bool operator==(const SnappedEdge&) const = default;
};

inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

struct VertexHash {
  std::size_t operator()(const SnappedVertex& v) const {
    return mix64(static_cast<std::uint64_t>(v.x) * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint64_t>(v.y));
  }
};

struct EdgeHash {
  std::size_t operator()(const SnappedEdge& e) const {
    VertexHash h;
    return mix64(h(e.a) * 31 + h(e.b));
  }
};

template <typename Key, typename Hash>
void link_shared_keys(const std::unordered_map<Key, std::vector<std::size_t>, Hash>& owners,
                      std::vector<std::vector<std::size_t>>& adj) {
  for (const auto& [key, areas] : owners) {
    for (std::size_t a = 0; a < areas.size(); ++a) {
      for (std::size_t b = a + 1; b < areas.size(); ++b) {
        if (areas[a] == areas[b]) continue;
        adj[areas[a]].push_back(areas[b]);
        adj[areas[b]].push_back(areas[a]);
      }
    }
  }
}

}  // namespace detail

/// Neighbors via shared vertices (queen) or shared edges (rook) after rounding
/// coordinates to `snap_precision` decimal places.
inline NeighborGraph build_contiguity(const AreaSet& areas, Contiguity rule = Contiguity::Queen,
                                      int snap_precision = 6) {
  const double scale = std::pow(10.0, snap_precision);
  auto snap = [scale](const Coord& c) {
    return detail::SnappedVertex{std::llround(c.lon * scale), std::llround(c.lat * scale)};
  };

  const std::size_t n = areas.size();
  std::vector<std::vector<std::size_t>> adj(n);

  if (rule == Contiguity::Queen) {
    std::unordered_map<detail::SnappedVertex, std::vector<std::size_t>, detail::VertexHash> owners;
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& poly : areas[i].polygons) {
        for (const auto& ring : poly) {
          for (const auto& c : ring) {
            auto& list = owners[snap(c)];
            if (list.empty() || list.back() != i) list.push_back(i);
          }
        }
      }
    }
    detail::link_shared_keys(owners, adj);
  } else {
    std::unordered_map<detail::SnappedEdge, std::vector<std::size_t>, detail::EdgeHash> owners;
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& poly : areas[i].polygons) {
        for (const auto& ring : poly) {
          for (std::size_t k = 0; k + 1 < ring.size(); ++k) {
            auto a = snap(ring[k]);
            auto b = snap(ring[k + 1]);
            if (a == b) continue;
            if (b < a) std::swap(a, b);
            auto& list = owners[detail::SnappedEdge{a, b}];
            if (list.empty() || list.back() != i) list.push_back(i);
          }
        }
      }
    }
    detail::link_shared_keys(owners, adj);
  }

  NeighborGraph graph;
  std::vector<std::string> islands;
  for (std::size_t i = 0; i < n; ++i) {
    auto& row = adj[i];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    if (row.empty()) islands.push_back(areas[i].id);
  }
  graph.adjacency = std::move(adj);
  if (!islands.empty()) {
    std::string msg = std::to_string(islands.size()) + " location(s) without neighbors:";
    for (const auto& id : islands) msg += " " + id;
    graph.warnings.push_back(std::move(msg));
  }
  return graph;
}

/// {id: [neighbor ids]} for debugging neighbor definitions.
inline nlohmann::json adjacency_to_json(const NeighborGraph& graph, const AreaSet& areas) {
  nlohmann::json out = nlohmann::json::object();
  for (std::size_t i = 0; i < graph.size(); ++i) {
    auto list = nlohmann::json::array();
    for (auto j : graph.neighbors(i)) list.push_back(areas[j].id);
    out[areas[i].id] = std::move(list);
  }
  return out;
}

/// Compressed sparse rows; every nonempty row sums to one.
class WeightMatrix {
 public:
  struct Entry {
    std::size_t col;
    double weight;
  };

  WeightMatrix() : offsets_{0} {}

  std::size_t size() const { return offsets_.size() - 1; }
  bool self_included() const { return self_included_; }

  std::span<const Entry> row(std::size_t i) const {
    return {entries_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  bool row_empty(std::size_t i) const { return offsets_[i] == offsets_[i + 1]; }

  /// True when row i holds something other than the diagonal.
  bool has_neighbors(std::size_t i) const {
    for (const auto& e : row(i)) {
      if (e.col != i) return true;
    }
    return false;
  }

  std::size_t nonzeros() const { return entries_.size(); }

  /// Builds from per-row binary column sets (sorted, unique); each row gets 1/|row|.
  static WeightMatrix from_binary_rows(const std::vector<std::vector<std::size_t>>& rows, bool self_included) {
    WeightMatrix w;
    w.self_included_ = self_included;
    w.offsets_.reserve(rows.size() + 1);
    for (const auto& cols : rows) {
      if (!cols.empty()) {
        const double weight = 1.0 / static_cast<double>(cols.size());
        for (auto c : cols) w.entries_.push_back({c, weight});
      }
      w.offsets_.push_back(w.entries_.size());
    }
    return w;
  }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Entry> entries_;
  bool self_included_ = false;
};

/// Binary contiguity (plus the diagonal if include_self) divided by row count.
/// Rows with no neighbors stay empty, even when include_self is set.
inline WeightMatrix row_normalize(const NeighborGraph& graph, bool include_self) {
  std::vector<std::vector<std::size_t>> rows(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const auto& nb = graph.neighbors(i);
    if (nb.empty()) continue;
    rows[i] = nb;
    if (include_self) rows[i].insert(std::lower_bound(rows[i].begin(), rows[i].end(), i), i);
  }
  return WeightMatrix::from_binary_rows(rows, include_self);
}

/// Drops masked neighbors and renormalizes; masked locations get empty rows.
/// Rows left with only the diagonal are emptied as well.
inline WeightMatrix restrict_to_present(const WeightMatrix& w, const std::vector<bool>& present) {
  if (present.size() != w.size()) throw InputError("presence mask length does not match weight matrix");
  std::vector<std::vector<std::size_t>> rows(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!present[i]) continue;
    bool other = false;
    for (const auto& e : w.row(i)) {
      if (!present[e.col]) continue;
      rows[i].push_back(e.col);
      if (e.col != i) other = true;
    }
    if (!other) rows[i].clear();
  }
  return WeightMatrix::from_binary_rows(rows, w.self_included());
}

/// Submatrix over the present locations, renumbered in their original order.
/// Expects a matrix already restricted to `present`.
inline WeightMatrix compact(const WeightMatrix& w, const std::vector<bool>& present) {
  std::vector<std::size_t> new_index(w.size(), 0);
  std::size_t m = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (present[i]) new_index[i] = m++;
  }
  std::vector<std::vector<std::size_t>> rows;
  rows.reserve(m);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!present[i]) continue;
    auto& cols = rows.emplace_back();
    for (const auto& e : w.row(i)) cols.push_back(new_index[e.col]);
  }
  return WeightMatrix::from_binary_rows(rows, w.self_included());
}

}  // namespace stlisa
