#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "maxnet/geometry.hpp"
#include "maxnet/rng.hpp"

namespace maxnet {

using Bits = std::vector<std::uint8_t>;

struct DataMode {
  enum class Kind { single_far_corner, bernoulli, all_zero };

  Kind kind = Kind::single_far_corner;
  double q = 0.0; // bernoulli only

  static DataMode single_far_corner() { return {Kind::single_far_corner, 0.0}; }
  static DataMode all_zero() { return {Kind::all_zero, 0.0}; }
  static DataMode bernoulli(double q) {
    if (!(q >= 0.0 && q <= 1.0)) {
      throw std::domain_error("bernoulli data probability must lie in [0,1]");
    }
    return {Kind::bernoulli, q};
  }

  std::string name() const {
    switch (kind) {
    case Kind::single_far_corner:
      return "single_far_corner";
    case Kind::all_zero:
      return "all_zero";
    case Kind::bernoulli:
      return "bernoulli(" + std::to_string(q) + ")";
    }
    return "?";
  }
};

/// Node nearest to the (1,1) corner; ties go to the lower id.
inline NodeId far_corner_node(const Deployment &dep) {
  NodeId best = 0;
  double best_d2 = distance_sq(dep.positions[0], Point{1.0, 1.0});
  for (NodeId i = 1; i < dep.size(); ++i) {
    const double d2 = distance_sq(dep.positions[i], Point{1.0, 1.0});
    if (d2 < best_d2) {
      best = i;
      best_d2 = d2;
    }
  }
  return best;
}

inline Bits gen_data(const Deployment &dep, const DataMode &mode, Rng &rng) {
  Bits bits(dep.size(), 0);
  switch (mode.kind) {
  case DataMode::Kind::all_zero:
    break;
  case DataMode::Kind::single_far_corner:
    bits[far_corner_node(dep)] = 1;
    break;
  case DataMode::Kind::bernoulli:
    if (!(mode.q >= 0.0 && mode.q <= 1.0)) {
      throw std::domain_error("bernoulli data probability must lie in [0,1]");
    }
    for (auto &b : bits) {
      b = uniform01(rng) < mode.q ? 1 : 0;
    }
    break;
  }
  return bits;
}

/// One bit per node per round; stream[r-1][i] = Z_i(r).
using DataStream = std::vector<Bits>;

inline DataStream gen_stream(const Deployment &dep, const DataMode &mode, std::size_t rounds,
                             Rng &rng) {
  DataStream stream;
  stream.reserve(rounds);
  for (std::size_t r = 0; r < rounds; ++r) {
    stream.push_back(gen_data(dep, mode, rng));
  }
  return stream;
}

} // namespace maxnet
