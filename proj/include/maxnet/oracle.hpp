#pragma once

// Ground truth used to check the distributed protocols. Deliberately
// brute force and independent of the simulation engine.

#include <cstdint>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

#include "maxnet/data.hpp"
#include "maxnet/geometry.hpp"

namespace maxnet {

inline constexpr int kUnreachable = -1;

using HopVector = std::vector<int>;

/// Breadth-first hop counts from the sink on the graph with edges at
/// Euclidean distance < r. O(n^2) adjacency construction.
inline HopVector bfs_hops(const Deployment &dep, double r) {
  if (!(r > 0.0)) {
    throw std::domain_error("radius must be positive");
  }
  const std::size_t n = dep.size();
  std::vector<std::vector<NodeId>> adj(n);
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      if (distance(dep.positions[i], dep.positions[j]) < r) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
    }
  }
  HopVector hops(n, kUnreachable);
  std::queue<NodeId> tovisit;
  hops[kSink] = 0;
  tovisit.push(kSink);
  while (!tovisit.empty()) {
    const NodeId u = tovisit.front();
    tovisit.pop();
    for (const NodeId v : adj[u]) {
      if (hops[v] == kUnreachable) {
        hops[v] = hops[u] + 1;
        tovisit.push(v);
      }
    }
  }
  return hops;
}

inline std::uint8_t brute_max(const Bits &data) {
  if (data.empty()) {
    throw std::domain_error("brute_max of an empty vector");
  }
  std::uint8_t m = 0;
  for (const auto b : data) {
    m = static_cast<std::uint8_t>(m | (b != 0));
  }
  return m;
}

struct RoundOutput {
  std::size_t round = 0;
  std::uint8_t value = 0;

  friend bool operator==(const RoundOutput &, const RoundOutput &) = default;
};

/// Expected sink outputs: round r > d reports the MAX of round r - d.
inline std::vector<RoundOutput> pipelined_reference(const DataStream &stream, std::size_t d) {
  if (stream.size() <= d) {
    throw std::domain_error("stream must be longer than the pipeline delay");
  }
  std::vector<RoundOutput> out;
  for (std::size_t r = d + 1; r <= stream.size(); ++r) {
    out.push_back(RoundOutput{r, brute_max(stream[r - d - 1])});
  }
  return out;
}

} // namespace maxnet
