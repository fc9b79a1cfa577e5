// maxnet: command-line front end for the simulator and analysis toolkit.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "maxnet/harness/config.hpp"
#include "maxnet/harness/report.hpp"
#include "maxnet/harness/runner.hpp"
#include "maxnet/harness/scaling.hpp"
#include "maxnet/maxnet.hpp"

using namespace maxnet;
namespace hx = maxnet::harness;

namespace {

struct Common {
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  double delta_prime = 0.0;
  double p = 0.0; // 0: paper p
};

RadioParams radio_for(const Common &c) {
  RadioParams radio = radio_params(c.n, c.delta_prime);
  return c.p > 0.0 ? with_probability(radio, c.p) : radio;
}

DataMode data_mode_from(const std::string &name, double q) {
  if (name == "single_far_corner") {
    return DataMode::single_far_corner();
  }
  if (name == "all_zero") {
    return DataMode::all_zero();
  }
  if (name == "bernoulli") {
    return DataMode::bernoulli(q);
  }
  throw hx::ConfigError("unknown data mode '" + name + "'");
}

std::string slot_text(std::int64_t s) { return s == kNever ? "-" : std::to_string(s); }

int cmd_deploy(const Common &c, const std::string &out) {
  const Deployment dep = deploy(c.n, c.seed);
  const GridParams grid = tessellate(c.n);
  const RadioParams radio = radio_for(c);
  const OccupancyProfile occ = occupancy_profile(dep, grid);
  const Connectivity conn = connectivity(dep, radio.r);
  const HopVector hops = bfs_hops(dep, radio.r);
  int max_hop = 0;
  for (const int h : hops) {
    max_hop = std::max(max_hop, h);
  }
  std::printf("n=%zu seed=%llu\n", c.n, static_cast<unsigned long long>(c.seed));
  std::printf("grid: l_n=%d s_n=%.6f M_n=%d\n", grid.cells_per_side, grid.cell_side,
              grid.cell_count);
  std::printf("radio: r_n=%.6f delta=%.3f k1=%d p=%.6e\n", radio.r, radio.delta, radio.k1,
              radio.p);
  const auto [lo, hi] = std::minmax_element(occ.counts.begin(), occ.counts.end());
  std::printf("occupancy: min=%d max=%d bounds=[%.3f, %.3f] within=%s\n", *lo, *hi, occ.lower,
              occ.upper, occ.within_bounds ? "yes" : "no");
  std::printf("connected=%s components=%zu max_hop=%d hop_ceiling=%d\n",
              conn.connected ? "yes" : "no", conn.component_sizes.size(), max_hop,
              2 * grid.cells_per_side);
  if (!out.empty()) {
    std::ostringstream os;
    os << "id,x,y,cell,hop\n";
    for (NodeId i = 0; i < dep.size(); ++i) {
      os << i << ',' << hx::detail::format_double(dep.positions[i].x) << ','
         << hx::detail::format_double(dep.positions[i].y) << ','
         << cell_of(dep.positions[i], grid) << ',' << hops[i] << '\n';
    }
    hx::write_text(out, os.str());
  }
  return 0;
}

int cmd_bounds(std::size_t n, double alpha, double k, double delta_prime) {
  const AnalysisConstants c = analysis_constants(n, delta_prime);
  const PhaseBounds b = phase_bounds(c, alpha, k);
  std::printf("%-10s %s\n", "quantity", "value");
  std::printf("%-10s %zu\n", "n", c.n);
  std::printf("%-10s %.3f\n", "c1", c.c1);
  std::printf("%-10s %.3f\n", "c2", c.c2);
  std::printf("%-10s %d\n", "m", c.m);
  std::printf("%-10s %d\n", "k1", c.k1);
  std::printf("%-10s %.6e\n", "p", c.p);
  std::printf("%-10s %.6e\n", "p_S", c.p_s);
  std::printf("%-10s %d\n", "l_n", c.l_n);
  std::printf("%-10s %lld\n", "M_n", c.M_n);
  std::printf("%-10s %d\n", "w", c.w);
  std::printf("%-10s %d\n", "d", c.d);
  std::printf("%-10s %.6f\n", "c_m", cm(c.m));
  std::printf("%-10s %.6e\n", "s1", b.s1);
  std::printf("%-10s %.6e\n", "s2", b.s2);
  std::printf("%-10s %g\n", "alpha", alpha);
  std::printf("%-10s %g\n", "k", k);
  std::printf("%-10s %lld\n", "V1", static_cast<long long>(b.v1));
  std::printf("%-10s %lld\n", "V2", static_cast<long long>(b.v2));
  std::printf("%-10s %lld\n", "V3", static_cast<long long>(b.v3));
  std::printf("%-10s %lld\n", "V1+V2+V3", static_cast<long long>(b.total()));
  return 0;
}

struct TraceSink {
  std::unique_ptr<std::ofstream> file;
  TraceWriter writer;

  TraceSink(const std::string &path, std::int64_t limit) {
    if (path.empty()) {
      return;
    }
    file = std::make_unique<std::ofstream>(path);
    if (!*file) {
      throw hx::IoError("cannot write trace file: " + path);
    }
    writer = TraceWriter(file.get(), limit);
  }
};

int cmd_oneshot(const Common &c, const std::string &data_name, double q, std::int64_t max_slots,
                const std::string &stop, const std::string &trace, std::int64_t trace_limit) {
  const Deployment dep = deploy(c.n, c.seed);
  const RadioParams radio = radio_for(c);
  Rng data_rng(derive_seed(0, c.n, c.seed, hx::stream_tag::data));
  Rng rng(derive_seed(0, c.n, c.seed, hx::stream_tag::protocol));
  const Bits data = gen_data(dep, data_mode_from(data_name, q), data_rng);
  TraceSink sink(trace, trace_limit);
  OneShotOptions opts;
  opts.max_slots = max_slots > 0 ? max_slots : 4 * phase_bounds(analysis_constants(c.n, c.delta_prime)).total();
  opts.stop = stop == "sink" ? StopRule::sink : stop == "phase1" ? StopRule::phase1 : StopRule::all_events;
  opts.trace = sink.writer;
  const OneShotResult res = one_shot_run(dep, radio, data, rng, opts);
  std::printf("p=%.6e max_slots=%lld complete=%s\n", radio.p,
              static_cast<long long>(opts.max_slots), res.complete ? "yes" : "no");
  std::printf("T_phase1=%s T_sink=%s T_all=%s\n", slot_text(res.phase1_done_slot).c_str(),
              slot_text(res.sink_done_slot).c_str(), slot_text(res.all_done_slot).c_str());
  std::printf("true_max=%d sink_value=%d tx_total=%lld tx_at_sink=%lld\n", res.true_max,
              res.sink_value, static_cast<long long>(res.tx_count),
              static_cast<long long>(res.tx_at_sink));
  return 0;
}

int cmd_hops(const Common &c, std::int64_t tau, const std::string &trace,
             std::int64_t trace_limit) {
  const Deployment dep = deploy(c.n, c.seed);
  const RadioParams radio = radio_for(c);
  Rng rng(derive_seed(0, c.n, c.seed, hx::stream_tag::hop_pass));
  TraceSink sink(trace, trace_limit);
  HopDistanceOptions opts;
  opts.trace = sink.writer;
  const HopDistanceResult res = hop_distance_run(dep, radio, tau, rng, opts);
  const HopVector truth = bfs_hops(dep, radio.r);
  std::size_t match = 0, unset = 0, below = 0;
  for (std::size_t i = 0; i < res.hops.size(); ++i) {
    match += res.hops[i] == truth[i];
    unset += res.hops[i] == kUnreachable;
    below += res.hops[i] != kUnreachable && res.hops[i] < truth[i];
  }
  std::printf("d=%d frame_bits=%d tau=%lld total_slots=%lld tx=%lld\n", res.d, res.frame_bits,
              static_cast<long long>(res.tau), static_cast<long long>(res.total_slots),
              static_cast<long long>(res.tx_count));
  std::printf("match_bfs=%zu/%zu unset=%zu below_bfs=%zu\n", match, res.hops.size(), unset, below);
  return 0;
}

int cmd_pipelined(const Common &c, std::int64_t tau, std::size_t rounds, double q,
                  const std::string &trace, std::int64_t trace_limit) {
  const Deployment dep = deploy(c.n, c.seed);
  const RadioParams radio = radio_for(c);
  const int d = hop_ceiling(c.n);
  const HopVector hops = bfs_hops(dep, radio.r);
  Rng data_rng(derive_seed(0, c.n, c.seed, hx::stream_tag::data));
  Rng rng(derive_seed(0, c.n, c.seed, hx::stream_tag::protocol));
  const DataStream stream = gen_stream(dep, DataMode::bernoulli(q), rounds + d, data_rng);
  TraceSink sink(trace, trace_limit);
  PipelinedOptions opts;
  opts.trace = sink.writer;
  const PipelinedResult res = pipelined_run(dep, radio, hops, tau, d, stream, rng, opts);
  const auto ref = pipelined_reference(stream, static_cast<std::size_t>(d));
  std::size_t ok = 0, full = 0, full_ok = 0;
  for (std::size_t k = 0; k < res.outputs.size(); ++k) {
    const bool match = res.outputs[k] == ref[k];
    const bool f = res.round_full_success[res.outputs[k].round - 1];
    ok += match;
    full += f;
    full_ok += f && match;
  }
  std::printf("d=%d tau=%lld delay_slots=%lld total_tx=%lld max_stored_bits=%zu\n", d,
              static_cast<long long>(tau), static_cast<long long>(res.delay_slots),
              static_cast<long long>(res.total_tx), res.max_stored_bits);
  std::printf("outputs=%zu correct=%zu full_success_rounds=%zu correct_in_full=%zu\n",
              res.outputs.size(), ok, full, full_ok);
  return 0;
}

int cmd_sweep(const std::string &path, bool quiet) {
  const hx::ExperimentConfig cfg = hx::load_config(path);
  const hx::RunSummary summary = hx::run_config(cfg);
  if (!cfg.csv_path.empty()) {
    hx::report(summary.records, hx::ReportFormat::csv, cfg.csv_path);
  }
  if (!cfg.json_path.empty()) {
    hx::report(summary.records, hx::ReportFormat::json, cfg.json_path);
  }
  if (!cfg.svg_dir.empty()) {
    hx::report(summary.records, hx::ReportFormat::svg, cfg.svg_dir);
  }
  for (const auto &[n, tau] : summary.tau_by_n) {
    std::fprintf(stderr, "tau[n=%zu]=%lld\n", n, static_cast<long long>(tau));
  }
  if (cfg.csv_path.empty() && !quiet) {
    hx::write_csv(summary.records, std::cout);
  }
  return 0;
}

int cmd_report(const std::string &in, const std::string &format, const std::string &out) {
  const auto records = hx::load_records(in);
  if (format == "csv") {
    if (out.empty()) {
      hx::write_csv(records, std::cout);
    } else {
      hx::report(records, hx::ReportFormat::csv, out);
    }
  } else if (format == "json") {
    if (out.empty()) {
      std::cout << hx::to_json(records).dump(2) << '\n';
    } else {
      hx::report(records, hx::ReportFormat::json, out);
    }
  } else {
    for (const auto &p : hx::report(records, hx::ReportFormat::svg, out.empty() ? "." : out)) {
      std::cout << p << '\n';
    }
  }
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Simulator for MAX computation over random multihop slotted-Aloha networks"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--n", common.n, "Number of nodes (>= 16)")->capture_default_str();
    sub->add_option("--seed", common.seed, "Deployment seed")->capture_default_str();
    sub->add_option("--delta-prime", common.delta_prime, "Protocol-model guard")->capture_default_str();
    sub->add_option("--p", common.p, "Transmit probability override (default: paper p)");
  };
  std::string trace;
  std::int64_t trace_limit = 10000;
  auto add_trace = [&](CLI::App *sub) {
    sub->add_option("--trace", trace, "Write line-delimited JSON slot records to FILE");
    sub->add_option("--trace-limit", trace_limit, "Maximum trace lines")->capture_default_str();
  };

  auto *deploy_cmd = app.add_subcommand("deploy", "Inspect a deployment");
  add_common(deploy_cmd);
  std::string positions_out;
  deploy_cmd->add_option("--out", positions_out, "Write node positions as CSV");

  auto *bounds_cmd = app.add_subcommand("bounds", "Print analysis constants and V1/V2/V3");
  std::size_t bounds_n = 1000;
  double alpha = 1.0, k = 1.0, bounds_delta = 0.0;
  bounds_cmd->add_option("--n", bounds_n, "Number of nodes")->required();
  bounds_cmd->add_option("--alpha", alpha, "Confidence exponent")->capture_default_str();
  bounds_cmd->add_option("--k", k, "Confidence constant")->capture_default_str();
  bounds_cmd->add_option("--delta-prime", bounds_delta, "Protocol-model guard")->capture_default_str();

  auto *oneshot_cmd = app.add_subcommand("oneshot", "Run One-Shot MAX once");
  add_common(oneshot_cmd);
  add_trace(oneshot_cmd);
  std::string data_name = "single_far_corner", stop = "all";
  double q = 0.5;
  std::int64_t max_slots = 0;
  oneshot_cmd->add_option("--data", data_name, "single_far_corner | all_zero | bernoulli")->capture_default_str();
  oneshot_cmd->add_option("--q", q, "Bernoulli probability")->capture_default_str();
  oneshot_cmd->add_option("--max-slots", max_slots, "Slot cap (default 4(V1+V2+V3))");
  oneshot_cmd->add_option("--stop", stop, "all | sink | phase1")->capture_default_str();

  auto *hops_cmd = app.add_subcommand("hops", "Run Hop Distance Compute once");
  add_common(hops_cmd);
  add_trace(hops_cmd);
  std::int64_t tau = 0;
  hops_cmd->add_option("--tau", tau, "Frames per superframe")->required();

  auto *pipe_cmd = app.add_subcommand("pipelined", "Run Pipelined MAX once on BFS hops");
  add_common(pipe_cmd);
  add_trace(pipe_cmd);
  std::size_t rounds = 50;
  double pipe_q = 0.001;
  pipe_cmd->add_option("--tau", tau, "Slots per round")->required();
  pipe_cmd->add_option("--rounds", rounds, "Rounds after warm-up")->capture_default_str();
  pipe_cmd->add_option("--q", pipe_q, "Per-node Bernoulli data probability")->capture_default_str();

  auto *sweep_cmd = app.add_subcommand("sweep", "Run an experiment configuration");
  std::string config_path;
  bool quiet = false;
  sweep_cmd->add_option("--config", config_path, "JSON configuration file")->required();
  sweep_cmd->add_flag("--quiet", quiet, "Do not print CSV to stdout");

  auto *report_cmd = app.add_subcommand("report", "Convert a JSON records file");
  std::string report_in, report_format = "csv", report_out;
  report_cmd->add_option("--in", report_in, "JSON records file")->required();
  report_cmd->add_option("--format", report_format, "csv | json | svg")
      ->check(CLI::IsMember({"csv", "json", "svg"}))
      ->capture_default_str();
  report_cmd->add_option("--out", report_out, "Output file (csv/json) or directory (svg)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*deploy_cmd) {
      return cmd_deploy(common, positions_out);
    }
    if (*bounds_cmd) {
      return cmd_bounds(bounds_n, alpha, k, bounds_delta);
    }
    if (*oneshot_cmd) {
      return cmd_oneshot(common, data_name, q, max_slots, stop, trace, trace_limit);
    }
    if (*hops_cmd) {
      return cmd_hops(common, tau, trace, trace_limit);
    }
    if (*pipe_cmd) {
      return cmd_pipelined(common, tau, rounds, pipe_q, trace, trace_limit);
    }
    if (*sweep_cmd) {
      return cmd_sweep(config_path, quiet);
    }
    if (*report_cmd) {
      return cmd_report(report_in, report_format, report_out);
    }
  } catch (const hx::IoError &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
