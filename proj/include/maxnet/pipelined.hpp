#pragma once

// Pipelined MAX over rounds of tau slots. A node at hop h forwards
// max{Z(r - d + h), Y(r - 1)} tagged with h mod 3; receivers keep only what
// arrives from hop h + 1. The sink evaluates the same expression at hop 0,
// which is the MAX of round r - d.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "maxnet/data.hpp"
#include "maxnet/geometry.hpp"
#include "maxnet/mac.hpp"
#include "maxnet/oracle.hpp"
#include "maxnet/trace.hpp"

namespace maxnet {

/// Identification bits carried with every pipelined transmission.
inline int id_bits(int hop) { return hop % 3; }

/// Hop of a transmitter as seen by a receiver at `receiver_hop`. Decodable
/// transmitters sit at hop h-1, h or h+1, which are distinct mod 3.
inline int infer_transmitter_hop(int receiver_hop, int bits) {
  for (int offset = -1; offset <= 1; ++offset) {
    const int candidate = receiver_hop + offset;
    if (candidate >= 0 && id_bits(candidate) == bits) {
      return candidate;
    }
  }
  throw std::logic_error("identification bits match no decodable hop");
}

struct PipelinedOptions {
  SamplingMode sampling = SamplingMode::skip;
  bool instrument = false; // record per-level forwarded maxima
  TraceWriter trace;
};

struct PipelinedResult {
  int d = 0;
  std::int64_t tau = 0;
  std::int64_t delay_slots = 0; // d tau
  std::vector<RoundOutput> outputs;   // rounds d+1..R
  std::vector<bool> round_full_success; // [r-1]: every non-sink node succeeded in round r
  std::vector<std::int64_t> round_tx;
  std::int64_t total_tx = 0;
  std::size_t max_stored_bits = 0;      // largest per-node data queue seen
  std::vector<std::size_t> stored_bits_cap; // d - h_i + 1
  std::int64_t hop_locality_violations = 0;
  // level_max[r-1][h]: max of T_i(r) over hop-h nodes that transmitted
  // successfully in round r, or -1 if none did. Only with `instrument`.
  std::vector<std::vector<int>> level_max;
};

/// Throws std::invalid_argument unless hops are a usable hop structure:
/// sink at 0, every other node in [1, d], |h_i - h_j| <= 1 within range r.
inline void validate_hops(const Channel &channel, const HopVector &hops, int d) {
  if (hops.size() != channel.size()) {
    throw std::invalid_argument("hop vector size does not match the deployment");
  }
  if (hops[kSink] != 0) {
    throw std::invalid_argument("sink hop must be 0");
  }
  for (NodeId i = 1; i < hops.size(); ++i) {
    if (hops[i] < 1 || hops[i] > d) {
      throw std::invalid_argument("inconsistent hops: node " + std::to_string(i) + " has hop " +
                                  std::to_string(hops[i]) + " outside [1," + std::to_string(d) +
                                  "]");
    }
    for (const NodeId j : channel.in_range(i)) {
      if (std::abs(hops[i] - hops[j]) > 1) {
        throw std::invalid_argument("inconsistent hops: neighbours " + std::to_string(i) + " and " +
                                    std::to_string(j) + " differ by more than one");
      }
    }
  }
}

inline PipelinedResult pipelined_run(const Deployment &dep, const RadioParams &radio,
                                     const HopVector &hops, std::int64_t tau, int d,
                                     const DataStream &stream, Rng &rng,
                                     PipelinedOptions opts = {}) {
  if (tau < 1) {
    throw std::invalid_argument("tau must be >= 1");
  }
  const std::size_t n = dep.size();
  for (const auto &bits : stream) {
    if (bits.size() != n) {
      throw std::invalid_argument("data stream must supply one bit per node per round");
    }
  }
  Channel channel(dep, radio);
  validate_hops(channel, hops, d);

  PipelinedResult res;
  res.d = d;
  res.tau = tau;
  res.delay_slots = static_cast<std::int64_t>(d) * tau;
  res.stored_bits_cap.resize(n);
  for (NodeId i = 0; i < n; ++i) {
    res.stored_bits_cap[i] = static_cast<std::size_t>(d - hops[i] + 1);
  }

  TransmitterSampler sampler(radio.p, opts.sampling);
  std::vector<NodeId> senders; // the sink never transmits
  for (NodeId i = 1; i < n; ++i) {
    senders.push_back(i);
  }
  std::vector<std::deque<std::uint8_t>> stored(n);
  std::vector<std::uint8_t> y_prev(n, 0);
  std::vector<std::uint8_t> y_cur(n, 0);
  std::vector<std::uint8_t> sent(n, 0);
  std::vector<std::uint8_t> succeeded(n, 0);
  SlotOutcome outcome;
  std::vector<NodeId> tx;
  std::vector<NodeId> updates;

  const std::size_t rounds = stream.size();
  for (std::size_t r = 1; r <= rounds; ++r) {
    // Stored bits are Z_i(r-d+h_i)..Z_i(r); earlier rounds count as 0.
    for (NodeId i = 0; i < n; ++i) {
      auto &q = stored[i];
      q.push_back(stream[r - 1][i] ? 1 : 0);
      if (q.size() > res.stored_bits_cap[i]) {
        q.pop_front();
      }
      res.max_stored_bits = std::max(res.max_stored_bits, q.size());
      const std::uint8_t oldest = q.size() == res.stored_bits_cap[i] ? q.front() : 0;
      sent[i] = std::max(oldest, y_prev[i]);
    }
    std::fill(y_cur.begin(), y_cur.end(), 0);
    std::fill(succeeded.begin(), succeeded.end(), 0);
    std::int64_t round_tx = 0;

    std::int64_t slot = 0;
    while (true) {
      const std::int64_t gap = sampler.next(senders, rng, tx);
      if (gap >= tau - slot) {
        break;
      }
      slot += gap + 1;
      if (tx.empty()) {
        continue;
      }
      channel.resolve(tx, outcome);
      round_tx += static_cast<std::int64_t>(tx.size());
      updates.clear();
      for (const Reception &rec : outcome.receptions) {
        const int h_rx = hops[rec.receiver];
        const int h_tx = hops[rec.transmitter];
        if (std::abs(h_tx - h_rx) > 1) {
          ++res.hop_locality_violations;
          continue;
        }
        if (infer_transmitter_hop(h_rx, id_bits(h_tx)) == h_rx + 1 &&
            sent[rec.transmitter] > y_cur[rec.receiver]) {
          y_cur[rec.receiver] = sent[rec.transmitter];
          updates.push_back(rec.receiver);
        }
      }
      for (std::size_t k = 0; k < tx.size(); ++k) {
        if (outcome.tx_success[k]) {
          succeeded[tx[k]] = 1;
        }
      }
      opts.trace.write(static_cast<std::int64_t>(r - 1) * tau + slot, outcome, updates);
    }

    res.round_tx.push_back(round_tx);
    res.total_tx += round_tx;
    res.round_full_success.push_back(
        std::all_of(senders.begin(), senders.end(), [&](NodeId i) { return succeeded[i] != 0; }));
    if (opts.instrument) {
      std::vector<int> level(static_cast<std::size_t>(d) + 1, -1);
      for (const NodeId i : senders) {
        if (succeeded[i]) {
          auto &slot_max = level[static_cast<std::size_t>(hops[i])];
          slot_max = std::max(slot_max, static_cast<int>(sent[i]));
        }
      }
      res.level_max.push_back(std::move(level));
    }
    if (r > static_cast<std::size_t>(d)) {
      // Same forwarding rule as every other node, at hop 0:
      // max{Z_s(r - d), Y_s(r - 1)}.
      res.outputs.push_back(RoundOutput{r, sent[kSink]});
    }
    y_prev.swap(y_cur);
  }
  return res;
}

} // namespace maxnet
