#pragma once

// Runs the n_list x seeds cross product of an ExperimentConfig.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "maxnet/bounds.hpp"
#include "maxnet/data.hpp"
#include "maxnet/geometry.hpp"
#include "maxnet/harness/config.hpp"
#include "maxnet/hop_distance.hpp"
#include "maxnet/one_shot.hpp"
#include "maxnet/oracle.hpp"
#include "maxnet/pipelined.hpp"

namespace maxnet::harness {

/// One simulation outcome. The first block is the CSV schema; the rest is
/// instrumentation kept in memory only.
struct RunRecord {
  std::string protocol;
  std::size_t n = 0;
  std::optional<std::uint64_t> seed;
  double p = 0.0;
  std::optional<std::int64_t> tau;
  std::optional<std::int64_t> T_phase1;
  std::optional<std::int64_t> T_sink;
  std::optional<std::int64_t> T_all;
  std::optional<std::int64_t> total_tx;
  std::optional<bool> correct;
  std::optional<double> hop_match_frac;
  std::optional<std::int64_t> rounds_ok;
  std::optional<std::int64_t> rounds_total;
  std::optional<double> wallclock_ms;

  bool complete = false;
  std::string note;                       // why a run is incomplete, if it is
  std::vector<std::int64_t> cell_coverage; // one-shot, per nonempty cell
  std::vector<std::int64_t> column_done;   // one-shot, per column
  std::int64_t hops_below_bfs = 0;         // hops / pipelined
  std::vector<bool> round_full_success;    // pipelined, per simulated round
  std::vector<bool> output_matches;        // pipelined, per emitted output
  std::vector<std::int64_t> round_tx;      // pipelined, per simulated round
};

struct NetworkSetup {
  std::size_t n = 0;
  RadioParams radio;
  AnalysisConstants constants;
  PhaseBounds bounds;
  std::int64_t max_slots = 0;
  std::int64_t tau = 0; // 0 when the protocol does not use rounds/frames
};

namespace stream_tag {
inline constexpr std::uint64_t deployment = 1;
inline constexpr std::uint64_t data = 2;
inline constexpr std::uint64_t protocol = 3;
inline constexpr std::uint64_t hop_pass = 4;
inline constexpr std::uint64_t calibration = 5;
} // namespace stream_tag

/// Nearest-rank quantile.
inline std::int64_t quantile_nearest_rank(std::vector<std::int64_t> values, double q) {
  if (values.empty()) {
    throw std::domain_error("quantile of an empty sample");
  }
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

/// Empirical q-quantile of per-node first-successful-transmission slots,
/// pooled over `runs` one-shot calibration runs stopped at Phase I.
inline std::int64_t calibrate_tau(const ExperimentConfig &cfg, const NetworkSetup &net) {
  std::vector<std::int64_t> pooled;
  for (int c = 0; c < cfg.tau_policy.calibration_runs; ++c) {
    const auto run_seed = static_cast<std::uint64_t>(c);
    const Deployment dep = deploy(
        net.n, derive_seed(cfg.master_seed, net.n, run_seed, stream_tag::calibration));
    Rng data_rng(derive_seed(cfg.master_seed, net.n, run_seed, stream_tag::calibration + 1));
    Rng rng(derive_seed(cfg.master_seed, net.n, run_seed, stream_tag::calibration + 2));
    const Bits data = gen_data(dep, DataMode::all_zero(), data_rng);
    OneShotOptions opts;
    opts.max_slots = net.max_slots;
    opts.sampling = cfg.sampling;
    opts.stop = StopRule::phase1;
    const OneShotResult res = one_shot_run(dep, net.radio, data, rng, opts);
    for (const auto t : res.first_success_slot) {
      // Nodes that never succeeded count as the cap.
      pooled.push_back(t == kNever ? net.max_slots : t);
    }
  }
  return std::max<std::int64_t>(1, quantile_nearest_rank(std::move(pooled), cfg.tau_policy.q));
}

inline NetworkSetup setup_network(const ExperimentConfig &cfg, std::size_t n) {
  NetworkSetup net;
  net.n = n;
  net.constants = analysis_constants(n, cfg.delta_prime);
  net.bounds = phase_bounds(net.constants, cfg.alpha, cfg.k);
  net.radio = radio_params(n, cfg.delta_prime);
  const double p = cfg.p_policy.resolve(n, net.radio.p);
  if (!(p > 0.0 && p < 1.0)) {
    throw ConfigError("p policy yields p outside (0,1) for n=" + std::to_string(n));
  }
  net.radio.p = p;
  net.max_slots = cfg.max_slots > 0 ? cfg.max_slots : 4 * net.bounds.total();
  if (cfg.protocol == Protocol::hops || cfg.protocol == Protocol::pipelined) {
    const auto &tp = cfg.tau_policy;
    switch (tp.kind) {
    case TauPolicy::Kind::analytic: {
      const std::int64_t v1 = v1_bound(net.constants, tp.alpha, tp.k);
      net.tau = std::max<std::int64_t>(
          1, static_cast<std::int64_t>(std::floor(tp.fraction * static_cast<double>(v1))));
      break;
    }
    case TauPolicy::Kind::empirical_quantile:
      net.tau = calibrate_tau(cfg, net);
      break;
    case TauPolicy::Kind::fixed:
      net.tau = tp.fixed_tau;
      break;
    }
  }
  return net;
}

namespace detail {

inline double hop_match(const HopVector &hops, const HopVector &truth, std::int64_t &below) {
  std::size_t same = 0;
  below = 0;
  for (std::size_t i = 0; i < hops.size(); ++i) {
    same += hops[i] == truth[i];
    if (hops[i] != kUnreachable && truth[i] != kUnreachable && hops[i] < truth[i]) {
      ++below;
    }
  }
  return static_cast<double>(same) / static_cast<double>(hops.size());
}

inline void run_one_shot(const ExperimentConfig &cfg, const NetworkSetup &net,
                         const Deployment &dep, std::uint64_t seed, RunRecord &rec) {
  Rng data_rng(derive_seed(cfg.master_seed, net.n, seed, stream_tag::data));
  Rng rng(derive_seed(cfg.master_seed, net.n, seed, stream_tag::protocol));
  const Bits data = gen_data(dep, cfg.data_mode, data_rng);
  OneShotOptions opts;
  opts.max_slots = net.max_slots;
  opts.sampling = cfg.sampling;
  opts.stop = cfg.stop;
  const OneShotResult res = one_shot_run(dep, net.radio, data, rng, opts);
  auto slot = [](std::int64_t s) {
    return s == kNever ? std::nullopt : std::optional<std::int64_t>(s);
  };
  rec.T_phase1 = slot(res.phase1_done_slot);
  rec.T_sink = slot(res.sink_done_slot);
  rec.T_all = slot(res.all_done_slot);
  if (res.sink_done_slot != kNever) {
    rec.total_tx = res.tx_at_sink;
  }
  rec.complete = res.complete;
  if (res.complete) {
    rec.correct = res.sink_value == brute_max(data);
  } else {
    rec.note = "max_slots exhausted";
  }
  const TessellationGrid grid = build_grid(dep);
  for (std::size_t c = 0; c < grid.cell_members.size(); ++c) {
    if (!grid.cell_members[c].empty()) {
      rec.cell_coverage.push_back(res.cell_coverage_slot[c]);
    }
  }
  rec.column_done = res.column_done_slot;
}

inline void run_hops(const ExperimentConfig &cfg, const NetworkSetup &net, const Deployment &dep,
                     std::uint64_t seed, RunRecord &rec) {
  Rng rng(derive_seed(cfg.master_seed, net.n, seed, stream_tag::hop_pass));
  HopDistanceOptions opts;
  opts.sampling = cfg.sampling;
  const HopDistanceResult res = hop_distance_run(dep, net.radio, net.tau, rng, opts);
  const HopVector truth = bfs_hops(dep, net.radio.r);
  rec.tau = net.tau;
  rec.total_tx = res.tx_count;
  rec.hop_match_frac = hop_match(res.hops, truth, rec.hops_below_bfs);
  rec.correct = res.hops == truth;
  rec.complete = true;
}

inline void run_pipelined(const ExperimentConfig &cfg, const NetworkSetup &net,
                          const Deployment &dep, std::uint64_t seed, RunRecord &rec) {
  const int d = net.constants.d;
  const HopVector truth = bfs_hops(dep, net.radio.r);
  HopVector hops = truth;
  if (cfg.hop_source == HopSource::protocol) {
    Rng hop_rng(derive_seed(cfg.master_seed, net.n, seed, stream_tag::hop_pass));
    HopDistanceOptions hopts;
    hopts.sampling = cfg.sampling;
    hops = hop_distance_run(dep, net.radio, net.tau, hop_rng, hopts).hops;
  }
  rec.tau = net.tau;
  rec.hop_match_frac = hop_match(hops, truth, rec.hops_below_bfs);

  Rng data_rng(derive_seed(cfg.master_seed, net.n, seed, stream_tag::data));
  Rng rng(derive_seed(cfg.master_seed, net.n, seed, stream_tag::protocol));
  const DataStream stream = gen_stream(dep, cfg.data_mode, cfg.rounds + d, data_rng);
  PipelinedOptions opts;
  opts.sampling = cfg.sampling;
  PipelinedResult res;
  try {
    res = pipelined_run(dep, net.radio, hops, net.tau, d, stream, rng, opts);
  } catch (const std::invalid_argument &e) {
    rec.complete = false;
    rec.note = e.what();
    return;
  }
  const auto reference = pipelined_reference(stream, static_cast<std::size_t>(d));
  std::int64_t ok = 0;
  bool conditional_ok = true;
  for (std::size_t k = 0; k < res.outputs.size(); ++k) {
    const bool match = res.outputs[k] == reference[k];
    rec.output_matches.push_back(match);
    ok += match;
    if (!match && res.round_full_success[res.outputs[k].round - 1]) {
      conditional_ok = false;
    }
  }
  rec.total_tx = res.total_tx;
  rec.rounds_ok = ok;
  rec.rounds_total = static_cast<std::int64_t>(res.outputs.size());
  rec.correct = conditional_ok;
  rec.round_full_success = res.round_full_success;
  rec.round_tx = res.round_tx;
  rec.complete = true;
}

inline RunRecord run_single(const ExperimentConfig &cfg, const NetworkSetup &net,
                            std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.protocol = to_string(cfg.protocol);
  rec.n = net.n;
  rec.seed = seed;
  rec.p = net.radio.p;
  const Deployment dep =
      deploy(net.n, derive_seed(cfg.master_seed, net.n, seed, stream_tag::deployment));
  switch (cfg.protocol) {
  case Protocol::one_shot:
    run_one_shot(cfg, net, dep, seed, rec);
    break;
  case Protocol::hops:
    run_hops(cfg, net, dep, seed, rec);
    break;
  case Protocol::pipelined:
    run_pipelined(cfg, net, dep, seed, rec);
    break;
  case Protocol::bounds:
    break;
  }
  if (cfg.record_wallclock) {
    rec.wallclock_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return rec;
}

inline RunRecord bounds_record(const NetworkSetup &net) {
  RunRecord rec;
  rec.protocol = to_string(Protocol::bounds);
  rec.n = net.n;
  rec.p = net.radio.p;
  rec.tau = net.bounds.v1;
  rec.T_phase1 = net.bounds.v1;
  rec.T_sink = net.bounds.total();
  // Reverse diffusion back through the bottom row and up the columns.
  rec.T_all = net.bounds.total() + net.bounds.v2 + net.bounds.v3;
  rec.complete = true;
  return rec;
}

} // namespace detail

struct RunSummary {
  std::vector<RunRecord> records;
  std::map<std::size_t, std::int64_t> tau_by_n;
};

/// Executes the configuration. Records come back in configuration order
/// (n_list major, seeds minor) whatever the thread count.
inline RunSummary run_config(const ExperimentConfig &cfg) {
  validate(cfg);
  RunSummary summary;
  std::vector<NetworkSetup> nets;
  for (const auto n : cfg.n_list) {
    nets.push_back(setup_network(cfg, n));
    if (nets.back().tau > 0) {
      summary.tau_by_n[n] = nets.back().tau;
    }
  }
  if (cfg.protocol == Protocol::bounds) {
    for (const auto &net : nets) {
      summary.records.push_back(detail::bounds_record(net));
    }
    return summary;
  }

  const std::size_t total = nets.size() * cfg.seeds.size();
  summary.records.resize(total);
  std::vector<std::exception_ptr> errors(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t idx = next++; idx < total; idx = next++) {
      const auto &net = nets[idx / cfg.seeds.size()];
      try {
        summary.records[idx] = detail::run_single(cfg, net, cfg.seeds[idx % cfg.seeds.size()]);
      } catch (...) {
        errors[idx] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::min<unsigned>(cfg.threads, static_cast<unsigned>(total));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back(worker);
    }
  }
  for (const auto &err : errors) {
    if (err) {
      std::rethrow_exception(err);
    }
  }
  return summary;
}

} // namespace maxnet::harness
