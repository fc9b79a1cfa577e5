#pragma once

// Random deployments on the unit square, the analysis tessellation and the
// radio parameters derived from the node count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "maxnet/rng.hpp"

namespace maxnet {

using NodeId = std::uint32_t;

inline constexpr NodeId kSink = 0;
inline constexpr std::size_t kMinNodes = 16;

/// Occupancy constants of the tessellation (lower and upper node count per
/// cell, in units of ln n).
inline constexpr double kC1 = 0.091;
inline constexpr double kC2 = 5.41;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point &, const Point &) = default;
};

inline double distance(const Point &a, const Point &b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

inline double distance_sq(const Point &a, const Point &b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

struct Deployment {
  std::size_t n = 0;
  std::vector<Point> positions;
  std::uint64_t seed = 0;

  static constexpr NodeId sink_id = kSink;

  std::size_t size() const { return positions.size(); }
};

inline void require_network_size(std::size_t n) {
  if (n < kMinNodes) {
    throw std::domain_error("network too small for tessellation: n=" + std::to_string(n) +
                            " (need n >= 16)");
  }
}

/// Sink pinned at the origin, nodes 1..n-1 i.i.d. uniform on [0,1]^2.
inline Deployment deploy(std::size_t n, std::uint64_t seed) {
  require_network_size(n);
  Deployment dep;
  dep.n = n;
  dep.seed = seed;
  dep.positions.reserve(n);
  dep.positions.push_back(Point{0.0, 0.0});
  Rng rng(seed);
  for (std::size_t i = 1; i < n; ++i) {
    const double x = uniform01(rng);
    const double y = uniform01(rng);
    dep.positions.push_back(Point{x, y});
  }
  return dep;
}

/// Deployment from explicit positions; positions[0] must be the origin.
inline Deployment make_deployment(std::vector<Point> positions) {
  if (positions.empty() || !(positions.front() == Point{0.0, 0.0})) {
    throw std::domain_error("sink (node 0) must be at the origin");
  }
  for (const auto &pt : positions) {
    if (!(pt.x >= 0.0 && pt.x <= 1.0 && pt.y >= 0.0 && pt.y <= 1.0)) {
      throw std::domain_error("node position outside the unit square");
    }
  }
  Deployment dep;
  dep.n = positions.size();
  dep.positions = std::move(positions);
  return dep;
}

struct GridParams {
  int cells_per_side = 0; // l_n
  double cell_side = 0.0; // s_n = 1 / l_n
  int cell_count = 0;     // M_n = l_n^2
};

inline GridParams tessellate(std::size_t n) {
  require_network_size(n);
  const double ln_n = std::log(static_cast<double>(n));
  const int l = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n) / (2.75 * ln_n))));
  return GridParams{l, 1.0 / l, l * l};
}

struct CellCoord {
  int col = 0; // x index
  int row = 0; // y index

  friend bool operator==(const CellCoord &, const CellCoord &) = default;
};

inline CellCoord cell_coord(const Point &pt, const GridParams &grid) {
  if (!(pt.x >= 0.0 && pt.x <= 1.0 && pt.y >= 0.0 && pt.y <= 1.0)) {
    throw std::domain_error("point outside the unit square");
  }
  const int l = grid.cells_per_side;
  const int col = std::min(static_cast<int>(std::floor(pt.x * l)), l - 1);
  const int row = std::min(static_cast<int>(std::floor(pt.y * l)), l - 1);
  return CellCoord{col, row};
}

/// Flattened cell index, row-major from the bottom-left cell.
inline int cell_of(const Point &pt, const GridParams &grid) {
  const CellCoord c = cell_coord(pt, grid);
  return c.row * grid.cells_per_side + c.col;
}

struct TessellationGrid {
  GridParams params;
  std::vector<int> cell_of_node;
  std::vector<std::vector<NodeId>> cell_members;
};

inline TessellationGrid build_grid(const Deployment &dep) {
  TessellationGrid grid;
  grid.params = tessellate(dep.n);
  grid.cell_members.resize(static_cast<std::size_t>(grid.params.cell_count));
  grid.cell_of_node.reserve(dep.size());
  for (NodeId i = 0; i < dep.size(); ++i) {
    const int c = cell_of(dep.positions[i], grid.params);
    grid.cell_of_node.push_back(c);
    grid.cell_members[static_cast<std::size_t>(c)].push_back(i);
  }
  return grid;
}

struct RadioParams {
  double r = 0.0;           // transmission radius r_n
  double delta_prime = 0.0; // protocol-model guard
  double delta = 1.0;       // 1 + delta_prime
  int k1 = 0;               // cells in the interference square
  double p = 0.0;           // per-slot transmit probability

  /// Receiver-side guard distance (1 + delta') r.
  double guard() const { return (1.0 + delta_prime) * r; }
};

inline double transmission_radius(std::size_t n) {
  const double ln_n = std::log(static_cast<double>(n));
  return std::sqrt(13.75 * ln_n / static_cast<double>(n));
}

inline RadioParams radio_params(std::size_t n, double delta_prime = 0.0) {
  require_network_size(n);
  if (!(delta_prime >= 0.0)) {
    throw std::domain_error("delta_prime must be >= 0");
  }
  const GridParams grid = tessellate(n);
  RadioParams radio;
  radio.r = transmission_radius(n);
  radio.delta_prime = delta_prime;
  radio.delta = 1.0 + delta_prime;
  const int span = static_cast<int>(std::ceil((1.0 + radio.delta) * radio.r / grid.cell_side));
  radio.k1 = (2 * span + 1) * (2 * span + 1);
  radio.p = 1.0 / (radio.k1 * kC2 * std::log(static_cast<double>(n)));
  return radio;
}

inline RadioParams with_probability(RadioParams radio, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("transmit probability must lie in (0,1)");
  }
  radio.p = p;
  return radio;
}

struct OccupancyProfile {
  std::vector<int> counts;
  double lower = 0.0; // c1 ln n
  double upper = 0.0; // c2 ln n
  bool within_bounds = false;
};

inline OccupancyProfile occupancy_profile(const Deployment &dep, const GridParams &grid) {
  OccupancyProfile prof;
  prof.counts.assign(static_cast<std::size_t>(grid.cell_count), 0);
  for (const auto &pt : dep.positions) {
    ++prof.counts[static_cast<std::size_t>(cell_of(pt, grid))];
  }
  const double ln_n = std::log(static_cast<double>(dep.n));
  prof.lower = kC1 * ln_n;
  prof.upper = kC2 * ln_n;
  prof.within_bounds = std::all_of(prof.counts.begin(), prof.counts.end(), [&](int c) {
    return prof.lower <= c && c <= prof.upper;
  });
  return prof;
}

/// Uniform bucket grid over the unit square whose buckets are at least
/// `radius` wide, so a radius query only touches the 3x3 neighbouring
/// buckets.
class SpatialIndex {
public:
  SpatialIndex(const std::vector<Point> &pts, double radius)
      : side_(std::max(1, static_cast<int>(std::floor(1.0 / std::max(radius, 1e-12))))) {
    side_ = std::min(side_, 4096);
    start_.assign(static_cast<std::size_t>(side_ * side_) + 1, 0);
    std::vector<int> bucket(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      bucket[i] = bucket_of(pts[i]);
      ++start_[static_cast<std::size_t>(bucket[i]) + 1];
    }
    for (std::size_t b = 1; b < start_.size(); ++b) {
      start_[b] += start_[b - 1];
    }
    ids_.resize(pts.size());
    std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      ids_[fill[static_cast<std::size_t>(bucket[i])]++] = static_cast<NodeId>(i);
    }
  }

  /// Calls f(id) for every indexed point in the buckets around `pt`.
  template <class F> void for_each_candidate(const Point &pt, F &&f) const {
    const int bx = coord(pt.x);
    const int by = coord(pt.y);
    for (int y = std::max(0, by - 1); y <= std::min(side_ - 1, by + 1); ++y) {
      for (int x = std::max(0, bx - 1); x <= std::min(side_ - 1, bx + 1); ++x) {
        const auto b = static_cast<std::size_t>(y * side_ + x);
        for (std::uint32_t k = start_[b]; k < start_[b + 1]; ++k) {
          f(ids_[k]);
        }
      }
    }
  }

private:
  int coord(double v) const { return std::clamp(static_cast<int>(v * side_), 0, side_ - 1); }
  int bucket_of(const Point &pt) const { return coord(pt.y) * side_ + coord(pt.x); }

  int side_;
  std::vector<std::uint32_t> start_;
  std::vector<NodeId> ids_;
};

struct Connectivity {
  bool connected = false;
  std::vector<std::size_t> component_sizes; // descending
};

/// Components of the disk graph with edges at distance < r.
inline Connectivity connectivity(const Deployment &dep, double r) {
  if (!(r > 0.0)) {
    throw std::domain_error("radius must be positive");
  }
  const std::size_t n = dep.size();
  const SpatialIndex index(dep.positions, r);
  const double r2 = r * r;
  std::vector<int> comp(n, -1);
  Connectivity out;
  std::queue<NodeId> frontier;
  for (NodeId s = 0; s < n; ++s) {
    if (comp[s] >= 0) {
      continue;
    }
    const int id = static_cast<int>(out.component_sizes.size());
    std::size_t size = 0;
    comp[s] = id;
    frontier.push(s);
    while (!frontier.empty()) {
      const NodeId u = frontier.front();
      frontier.pop();
      ++size;
      index.for_each_candidate(dep.positions[u], [&](NodeId v) {
        if (comp[v] < 0 && distance_sq(dep.positions[u], dep.positions[v]) < r2) {
          comp[v] = id;
          frontier.push(v);
        }
      });
    }
    out.component_sizes.push_back(size);
  }
  std::sort(out.component_sizes.rbegin(), out.component_sizes.rend());
  out.connected = out.component_sizes.size() == 1;
  return out;
}

} // namespace maxnet
