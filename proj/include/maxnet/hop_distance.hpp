#pragma once

// Hop Distance Compute: the sink floods 0 during superframe g_0; a node
// that first decodes value v during some superframe adopts hop v + 1 and
// advertises it, with probability p per frame, during the next superframe
// only.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "maxnet/geometry.hpp"
#include "maxnet/mac.hpp"
#include "maxnet/oracle.hpp"
#include "maxnet/trace.hpp"

namespace maxnet {

/// Slots needed to carry a number <= d.
inline int frame_bits(int d) {
  if (d < 1) {
    throw std::domain_error("hop ceiling must be >= 1");
  }
  return std::max(1, static_cast<int>(std::ceil(std::log2(static_cast<double>(d)))));
}

/// Hop ceiling 2 l_n.
inline int hop_ceiling(std::size_t n) { return 2 * tessellate(n).cells_per_side; }

struct HopDistanceOptions {
  SamplingMode sampling = SamplingMode::skip;
  TraceWriter trace; // slot field holds the frame index
};

struct HopDistanceResult {
  HopVector hops; // kUnreachable for nodes that never decoded
  int d = 0;
  int frame_bits = 0;
  std::int64_t tau = 0;         // frames per superframe
  std::int64_t total_slots = 0; // (d+1) tau frame_bits
  std::int64_t tx_count = 0;    // frame transmissions
  std::vector<int> decode_superframe;
};

inline HopDistanceResult hop_distance_run(const Deployment &dep, const RadioParams &radio,
                                          std::int64_t tau, Rng &rng,
                                          HopDistanceOptions opts = {}) {
  if (tau < 1) {
    throw std::invalid_argument("tau must be >= 1");
  }
  const std::size_t n = dep.size();
  HopDistanceResult res;
  res.d = hop_ceiling(dep.n);
  res.frame_bits = frame_bits(res.d);
  res.tau = tau;
  res.total_slots = static_cast<std::int64_t>(res.d + 1) * tau * res.frame_bits;
  res.hops.assign(n, kUnreachable);
  res.decode_superframe.assign(n, -1);
  res.hops[kSink] = 0;

  Channel channel(dep, radio);
  TransmitterSampler sampler(radio.p, opts.sampling);
  SlotOutcome outcome;
  std::vector<NodeId> tx;
  std::vector<NodeId> active{kSink};
  std::vector<NodeId> next_active;
  std::vector<NodeId> updates;

  auto absorb = [&](int superframe, std::int64_t frame) {
    updates.clear();
    for (const Reception &rec : outcome.receptions) {
      if (res.hops[rec.receiver] == kUnreachable) {
        res.hops[rec.receiver] = res.hops[rec.transmitter] + 1;
        res.decode_superframe[rec.receiver] = superframe;
        next_active.push_back(rec.receiver);
        updates.push_back(rec.receiver);
      }
    }
    opts.trace.write(frame, outcome, updates);
  };

  for (int g = 0; g <= res.d && !active.empty(); ++g) {
    next_active.clear();
    const std::int64_t first_frame = static_cast<std::int64_t>(g) * tau;
    if (g == 0) {
      // The sink is alone in every frame of g_0: the first frame already
      // reaches everything it ever will.
      tx.assign(1, kSink);
      channel.resolve(tx, outcome);
      res.tx_count += tau;
      absorb(g, first_frame + 1);
    } else {
      std::int64_t frame = 0;
      while (true) {
        const std::int64_t gap = sampler.next(active, rng, tx);
        if (gap >= tau - frame) {
          break;
        }
        frame += gap + 1;
        if (tx.empty()) {
          continue;
        }
        channel.resolve(tx, outcome);
        res.tx_count += static_cast<std::int64_t>(tx.size());
        absorb(g, first_frame + frame);
      }
    }
    std::sort(next_active.begin(), next_active.end());
    active.swap(next_active);
  }
  return res;
}

} // namespace maxnet
