#pragma once

// One-Shot MAX: every node transmits its running MAX with probability p
// per slot and folds every decoded bit into it.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "maxnet/data.hpp"
#include "maxnet/geometry.hpp"
#include "maxnet/mac.hpp"
#include "maxnet/oracle.hpp"
#include "maxnet/trace.hpp"

namespace maxnet {

inline constexpr std::int64_t kNever = -1;

enum class StopRule {
  all_events, // phase I, sink and network-wide completion
  sink,       // MAX available at the sink
  phase1,     // every node transmitted successfully at least once
};

/// Called after every non-idle slot with the slot number, its outcome and
/// the running MAX registers.
using OneShotObserver =
    std::function<void(std::int64_t, const SlotOutcome &, std::span<const std::uint8_t>)>;

struct OneShotOptions {
  std::int64_t max_slots = 0;
  SamplingMode sampling = SamplingMode::skip;
  StopRule stop = StopRule::all_events;
  TraceWriter trace;
  OneShotObserver observer;
};

struct OneShotResult {
  bool complete = false;
  std::int64_t slots_run = 0;
  std::int64_t phase1_done_slot = kNever;
  std::int64_t sink_done_slot = kNever;
  std::int64_t all_done_slot = kNever;
  std::int64_t tx_count = 0;   // every transmission, successful or not
  std::int64_t tx_at_sink = 0; // transmissions up to sink completion
  std::uint8_t true_max = 0;
  std::uint8_t sink_value = 0;
  std::vector<std::uint8_t> running_max;
  std::vector<std::int64_t> first_success_slot; // per node
  std::vector<std::int64_t> cell_coverage_slot; // per cell; kNever if empty/uncovered
  std::vector<std::int64_t> column_done_slot;   // per column, top-to-bottom success chain
};

namespace detail {

// Progress of the Phase-II chain in one column: a successful transmission
// from cell 1 (top), then from cell 2 in a later slot, ..., down to cell w.
struct ColumnTracker {
  int next = 0;
  std::int64_t last_slot = 0;
  std::int64_t done_slot = kNever;
};

} // namespace detail

inline OneShotResult one_shot_run(const Deployment &dep, const RadioParams &radio,
                                  const Bits &data, Rng &rng, OneShotOptions opts = {}) {
  const std::size_t n = dep.size();
  if (data.size() != n) {
    throw std::invalid_argument("data size does not match the deployment");
  }
  if (opts.max_slots <= 0) {
    throw std::invalid_argument("max_slots must be positive");
  }
  const TessellationGrid grid = build_grid(dep);
  const int l = grid.params.cells_per_side;
  const int w = l - 1;

  Channel channel(dep, radio);
  TransmitterSampler sampler(radio.p, opts.sampling);
  std::vector<NodeId> everyone(n);
  for (NodeId i = 0; i < n; ++i) {
    everyone[i] = i;
  }

  OneShotResult res;
  res.true_max = brute_max(data);
  res.running_max.assign(data.begin(), data.end());
  for (auto &y : res.running_max) {
    y = y ? 1 : 0;
  }
  res.first_success_slot.assign(n, kNever);
  std::vector<detail::ColumnTracker> columns(static_cast<std::size_t>(l));

  std::size_t holders = static_cast<std::size_t>(
      std::count(res.running_max.begin(), res.running_max.end(), res.true_max));
  std::size_t uncovered = n;

  auto &y = res.running_max;
  if (y[kSink] == res.true_max) {
    res.sink_done_slot = 0;
  }
  if (holders == n) {
    res.all_done_slot = 0;
  }
  auto finished = [&] {
    switch (opts.stop) {
    case StopRule::sink:
      return res.sink_done_slot != kNever;
    case StopRule::phase1:
      return res.phase1_done_slot != kNever;
    case StopRule::all_events:
      break;
    }
    return res.sink_done_slot != kNever && res.all_done_slot != kNever &&
           res.phase1_done_slot != kNever;
  };

  SlotOutcome outcome;
  std::vector<NodeId> tx;
  std::vector<NodeId> updates;
  std::int64_t t = 0;
  while (!finished()) {
    const std::int64_t gap = sampler.next(everyone, rng, tx);
    if (gap >= opts.max_slots - t) {
      t = opts.max_slots;
      break;
    }
    t += gap + 1;
    if (tx.empty()) {
      continue;
    }
    channel.resolve(tx, outcome);
    res.tx_count += static_cast<std::int64_t>(tx.size());

    // Receivers never transmit in the same slot, so the values sent this
    // slot (Y(t-1) of the transmitters) are unaffected by in-place updates.
    updates.clear();
    for (const Reception &rec : outcome.receptions) {
      if (y[rec.transmitter] > y[rec.receiver]) {
        y[rec.receiver] = y[rec.transmitter];
        updates.push_back(rec.receiver);
        if (y[rec.receiver] == res.true_max) {
          ++holders;
        }
      }
    }

    for (std::size_t k = 0; k < tx.size(); ++k) {
      if (!outcome.tx_success[k]) {
        continue;
      }
      const NodeId i = tx[k];
      if (res.first_success_slot[i] == kNever) {
        res.first_success_slot[i] = t;
        --uncovered;
      }
      const int cell = grid.cell_of_node[i];
      const int col = cell % l;
      const int row = cell / l;
      auto &tracker = columns[static_cast<std::size_t>(col)];
      if (tracker.done_slot == kNever && row == l - 1 - tracker.next && t > tracker.last_slot) {
        ++tracker.next;
        tracker.last_slot = t;
        if (tracker.next == w) {
          tracker.done_slot = t;
        }
      }
    }

    if (res.sink_done_slot == kNever && y[kSink] == res.true_max) {
      res.sink_done_slot = t;
      res.tx_at_sink = res.tx_count;
    }
    if (res.all_done_slot == kNever && holders == n) {
      res.all_done_slot = t;
    }
    if (res.phase1_done_slot == kNever && uncovered == 0) {
      res.phase1_done_slot = t;
    }
    opts.trace.write(t, outcome, updates);
    if (opts.observer) {
      opts.observer(t, outcome, y);
    }
  }

  res.slots_run = t;
  res.complete = finished();
  res.sink_value = y[kSink];

  res.cell_coverage_slot.assign(grid.cell_members.size(), kNever);
  for (std::size_t c = 0; c < grid.cell_members.size(); ++c) {
    const auto &members = grid.cell_members[c];
    if (members.empty()) {
      continue;
    }
    std::int64_t latest = 0;
    for (const NodeId i : members) {
      if (res.first_success_slot[i] == kNever) {
        latest = kNever;
        break;
      }
      latest = std::max(latest, res.first_success_slot[i]);
    }
    res.cell_coverage_slot[c] = latest;
  }
  res.column_done_slot.reserve(columns.size());
  for (const auto &col : columns) {
    res.column_done_slot.push_back(col.done_slot);
  }
  return res;
}

} // namespace maxnet
