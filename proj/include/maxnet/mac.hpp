#pragma once

// Slotted-Aloha transmitter sampling and protocol-model reception.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "maxnet/geometry.hpp"
#include "maxnet/rng.hpp"

namespace maxnet {

inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

struct Reception {
  NodeId receiver = kNoNode;
  NodeId transmitter = kNoNode;

  friend bool operator==(const Reception &, const Reception &) = default;
};

/// Result of one slot. `receptions` holds at most one entry per receiver,
/// grouped by transmitter in `transmitters` order; `tx_success[k]` belongs
/// to `transmitters[k]`.
struct SlotOutcome {
  std::vector<NodeId> transmitters;
  std::vector<Reception> receptions;
  std::vector<bool> tx_success;

  /// Transmitter decoded by `receiver`, or kNoNode for idle/collision.
  NodeId decoded_by(NodeId receiver) const {
    const auto it = std::find_if(receptions.begin(), receptions.end(),
                                 [&](const Reception &rec) { return rec.receiver == receiver; });
    return it != receptions.end() ? it->transmitter : kNoNode;
  }

  void clear() {
    transmitters.clear();
    receptions.clear();
    tx_success.clear();
  }
};

/// Precomputed neighbourhoods of a deployment under fixed radio parameters.
///
/// For every node the guard neighbourhood (other nodes at distance
/// <= (1+delta')r) is stored sorted by distance; the first `in_range_count`
/// entries are the nodes at distance < r.
class Channel {
public:
  Channel(const Deployment &dep, const RadioParams &radio) : n_(dep.size()), radio_(radio) {
    const double guard = radio.guard();
    const double guard2 = guard * guard;
    const double r2 = radio.r * radio.r;
    const SpatialIndex index(dep.positions, guard);
    offsets_.reserve(n_ + 1);
    offsets_.push_back(0);
    in_range_.reserve(n_);
    std::vector<std::pair<double, NodeId>> scratch;
    for (NodeId i = 0; i < n_; ++i) {
      scratch.clear();
      const Point &pi = dep.positions[i];
      index.for_each_candidate(pi, [&](NodeId j) {
        if (j == i) {
          return;
        }
        const double d2 = distance_sq(pi, dep.positions[j]);
        if (d2 <= guard2) {
          scratch.emplace_back(d2, j);
        }
      });
      std::sort(scratch.begin(), scratch.end());
      std::uint32_t within = 0;
      for (const auto &[d2, j] : scratch) {
        neighbors_.push_back(j);
        if (d2 < r2) {
          ++within;
        }
      }
      in_range_.push_back(within);
      offsets_.push_back(static_cast<std::uint32_t>(neighbors_.size()));
    }
    hits_.assign(n_, 0);
    transmitting_.assign(n_, 0);
  }

  std::size_t size() const { return n_; }
  const RadioParams &radio() const { return radio_; }

  /// Nodes at distance <= (1+delta')r from i, nearest first.
  std::span<const NodeId> guard_neighbors(NodeId i) const {
    return {neighbors_.data() + offsets_[i], neighbors_.data() + offsets_[i + 1]};
  }

  /// Nodes at distance < r from i.
  std::span<const NodeId> in_range(NodeId i) const {
    return {neighbors_.data() + offsets_[i], in_range_[i]};
  }

  /// Resolves one slot into `out` (reusing its storage). Not reentrant:
  /// uses per-channel scratch buffers.
  void resolve(std::span<const NodeId> transmitters, SlotOutcome &out) {
    out.clear();
    out.transmitters.assign(transmitters.begin(), transmitters.end());
    touched_.clear();
    for (const NodeId i : transmitters) {
      transmitting_[i] = 1;
    }
    // hits[j] = number of transmitters within the guard distance of j.
    for (const NodeId i : transmitters) {
      for (const NodeId j : guard_neighbors(i)) {
        if (hits_[j]++ == 0) {
          touched_.push_back(j);
        }
      }
    }
    // j decodes i iff i is in range, j is listening and i is the only
    // transmitter within the guard distance. i succeeds iff every node in
    // range decodes it.
    out.tx_success.reserve(transmitters.size());
    for (const NodeId i : transmitters) {
      bool ok = true;
      for (const NodeId j : in_range(i)) {
        if (!transmitting_[j] && hits_[j] == 1) {
          out.receptions.push_back(Reception{j, i});
        } else {
          ok = false;
        }
      }
      out.tx_success.push_back(ok);
    }
    for (const NodeId j : touched_) {
      hits_[j] = 0;
    }
    for (const NodeId i : transmitters) {
      transmitting_[i] = 0;
    }
  }

private:
  std::size_t n_;
  RadioParams radio_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> in_range_;
  std::vector<NodeId> neighbors_;
  std::vector<std::uint32_t> hits_;
  std::vector<std::uint8_t> transmitting_;
  std::vector<NodeId> touched_;
};

/// One-off slot resolution. Builds the neighbourhoods on every call; use a
/// Channel directly inside simulation loops.
inline SlotOutcome resolve_slot(std::span<const NodeId> transmitters, const Deployment &dep,
                                const RadioParams &radio) {
  for (const NodeId i : transmitters) {
    if (i >= dep.size()) {
      throw std::out_of_range("transmitter id out of range");
    }
  }
  std::vector<NodeId> tx(transmitters.begin(), transmitters.end());
  std::sort(tx.begin(), tx.end());
  tx.erase(std::unique(tx.begin(), tx.end()), tx.end());
  Channel channel(dep, radio);
  SlotOutcome out;
  channel.resolve(tx, out);
  return out;
}

enum class SamplingMode { naive, skip };

/// Draws the transmitters of the next slot (naive) or of the next non-idle
/// slot together with the number of idle slots skipped (skip). Both modes
/// give the same joint law of per-slot transmitter sets.
class TransmitterSampler {
public:
  TransmitterSampler(double p, SamplingMode mode) : p_(p), mode_(mode) {
    if (!(p > 0.0 && p < 1.0)) {
      throw std::domain_error("transmit probability must lie in (0,1)");
    }
    log_idle_per_node_ = std::log1p(-p);
  }

  double p() const { return p_; }
  SamplingMode mode() const { return mode_; }

  /// Samples from `population` (sorted ids). Writes a sorted transmitter
  /// list into `out` and returns the number of idle slots preceding it.
  /// Skip mode never returns an empty set unless the population is empty.
  std::int64_t next(std::span<const NodeId> population, Rng &rng, std::vector<NodeId> &out) {
    out.clear();
    const std::size_t a = population.size();
    if (a == 0) {
      return mode_ == SamplingMode::naive ? 0 : INT64_MAX;
    }
    if (mode_ == SamplingMode::naive) {
      bernoulli_subset(population, rng, out);
      return 0;
    }
    const double log_idle = static_cast<double>(a) * log_idle_per_node_;
    const std::int64_t gap = sample_failures(log_idle, rng);
    const double p_nonempty = -std::expm1(log_idle);
    if (static_cast<double>(a) * p_ > kInversionMaxMean) {
      // With this many expected transmitters the empty set is negligible
      // and a Bernoulli pass costs no more than resolving the slot.
      do {
        bernoulli_subset(population, rng, out);
      } while (out.empty());
    } else {
      const std::size_t k = truncated_binomial(a, log_idle, p_nonempty, rng);
      uniform_subset(population, k, rng, out);
    }
    return gap;
  }

private:
  static constexpr double kInversionMaxMean = 32.0;

  void bernoulli_subset(std::span<const NodeId> population, Rng &rng, std::vector<NodeId> &out) {
    for (const NodeId id : population) {
      if (uniform01(rng) < p_) {
        out.push_back(id);
      }
    }
  }

  // Binomial(a, p) conditioned on >= 1, by inversion starting at k = 1.
  std::size_t truncated_binomial(std::size_t a, double log_idle, double p_nonempty, Rng &rng) {
    const double ratio = p_ / (1.0 - p_);
    double pmf = static_cast<double>(a) * p_ * std::exp(log_idle - log_idle_per_node_);
    double target = uniform01(rng) * p_nonempty;
    std::size_t k = 1;
    while (k < a) {
      if (target < pmf) {
        break;
      }
      target -= pmf;
      pmf *= static_cast<double>(a - k) / static_cast<double>(k + 1) * ratio;
      ++k;
    }
    return k;
  }

  // Floyd's algorithm: k distinct positions, then sorted ids.
  void uniform_subset(std::span<const NodeId> population, std::size_t k, Rng &rng,
                      std::vector<NodeId> &out) {
    const std::size_t a = population.size();
    picks_.clear();
    for (std::size_t j = a - k; j < a; ++j) {
      const auto t = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(j + 1));
      const std::size_t pick = std::min(t, j);
      const auto pos = std::lower_bound(picks_.begin(), picks_.end(), pick);
      if (pos == picks_.end() || *pos != pick) {
        picks_.insert(pos, pick);
      } else {
        // j exceeds every earlier pick, so it goes at the end.
        picks_.push_back(j);
      }
    }
    for (const std::size_t idx : picks_) {
      out.push_back(population[idx]);
    }
  }

  double p_;
  SamplingMode mode_;
  double log_idle_per_node_ = 0.0;
  std::vector<std::size_t> picks_;
};

/// Convenience form: one draw over nodes 0..n-1.
struct SlotDraw {
  std::int64_t gap = 0;
  std::vector<NodeId> transmitters;
};

inline SlotDraw sample_slot_transmitters(std::size_t n, double p, Rng &rng, SamplingMode mode) {
  std::vector<NodeId> population(n);
  for (NodeId i = 0; i < n; ++i) {
    population[i] = i;
  }
  TransmitterSampler sampler(p, mode);
  SlotDraw draw;
  draw.gap = sampler.next(population, rng, draw.transmitters);
  return draw;
}

} // namespace maxnet
