#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "maxnet/harness/config.hpp"
#include "maxnet/harness/report.hpp"
#include "maxnet/harness/runner.hpp"
#include "maxnet/harness/scaling.hpp"

using namespace maxnet;
using namespace maxnet::harness;
using nlohmann::json;

namespace fs = std::filesystem;

namespace {

ExperimentConfig one_shot_cfg(std::vector<std::size_t> n_list, std::uint64_t seeds) {
  return parse_config(json{{"protocol", "one_shot"},
                           {"n_list", n_list},
                           {"seeds", {{"first", 1}, {"count", seeds}}},
                           {"p_policy", {{"inverse_log", 8.0}}},
                           {"stop_at", "sink"}});
}

fs::path scratch_dir(const std::string &name) {
  const fs::path dir = fs::temp_directory_path() / ("maxnet_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::size_t line_count(const std::string &s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

int run_cli(const std::string &args) {
  const std::string cmd = std::string(MAXNET_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RunRecord record(std::size_t n, double t_sink) {
  RunRecord r;
  r.protocol = "one_shot";
  r.n = n;
  r.p = 0.5;
  r.T_sink = static_cast<std::int64_t>(t_sink);
  return r;
}

} // namespace

TEST(Config, ParsesEveryPolicy) {
  const ExperimentConfig cfg = parse_config(json::parse(R"({
    "protocol": "pipelined", "n_list": [100, 200], "seeds": [3, 5, 8],
    "master_seed": 9, "delta_prime": 0.5, "rounds": 12, "max_slots": 1000,
    "p_policy": {"override": 0.01},
    "tau_policy": {"empirical_quantile": {"q": 0.99, "calibration_runs": 3}},
    "data_mode": {"bernoulli": 0.2}, "sampling": "naive", "stop_at": "phase1",
    "hop_source": "oracle", "threads": 2, "record_wallclock": true,
    "output": {"csv": "a.csv", "json": "a.json", "svg_dir": "plots"}})"));
  EXPECT_EQ(cfg.protocol, Protocol::pipelined);
  EXPECT_EQ(cfg.n_list, (std::vector<std::size_t>{100, 200}));
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{3, 5, 8}));
  EXPECT_EQ(cfg.master_seed, 9u);
  EXPECT_EQ(cfg.delta_prime, 0.5);
  EXPECT_EQ(cfg.rounds, 12u);
  EXPECT_EQ(cfg.max_slots, 1000);
  EXPECT_EQ(cfg.p_policy.kind, ProbabilityPolicy::Kind::override_value);
  EXPECT_EQ(cfg.p_policy.resolve(100, 0.3), 0.01);
  EXPECT_EQ(cfg.tau_policy.kind, TauPolicy::Kind::empirical_quantile);
  EXPECT_EQ(cfg.tau_policy.q, 0.99);
  EXPECT_EQ(cfg.tau_policy.calibration_runs, 3);
  EXPECT_EQ(cfg.data_mode.kind, DataMode::Kind::bernoulli);
  EXPECT_EQ(cfg.sampling, SamplingMode::naive);
  EXPECT_EQ(cfg.stop, StopRule::phase1);
  EXPECT_EQ(cfg.hop_source, HopSource::oracle);
  EXPECT_EQ(cfg.threads, 2u);
  EXPECT_TRUE(cfg.record_wallclock);
  EXPECT_EQ(cfg.svg_dir, "plots");

  const ExperimentConfig inv = one_shot_cfg({500}, 2);
  EXPECT_NEAR(inv.p_policy.resolve(500, 0.3), 1.0 / (8.0 * std::log(500.0)), 1e-15);
  const ExperimentConfig paper =
      parse_config(json{{"protocol", "hops"}, {"n_list", {100}}, {"seeds", {1}}, {"p_policy", "paper"},
                        {"tau_policy", {{"analytic", {{"fraction", 0.5}}}}}});
  EXPECT_EQ(paper.p_policy.resolve(100, 0.3), 0.3);
  EXPECT_EQ(paper.tau_policy.fraction, 0.5);
}

TEST(Config, RejectsInvalidConfigs) {
  const json base = {{"protocol", "one_shot"}, {"n_list", {100}}, {"seeds", {1}}};
  auto with = [&](const char *key, json value) {
    json j = base;
    j[key] = std::move(value);
    return j;
  };
  EXPECT_NO_THROW(parse_config(base));
  EXPECT_THROW(parse_config(json::array()), ConfigError);
  EXPECT_THROW(parse_config(json{{"n_list", {100}}}), ConfigError);
  EXPECT_THROW(parse_config(with("protocol", "gossip")), ConfigError);
  EXPECT_THROW(parse_config(with("n_list", {100, 15})), ConfigError);
  EXPECT_THROW(parse_config(with("n_list", json::array())), ConfigError);
  EXPECT_THROW(parse_config(with("seeds", json::array())), ConfigError);
  EXPECT_THROW(parse_config(with("seeds", "many")), ConfigError);
  EXPECT_THROW(parse_config(with("delta_prime", -1)), ConfigError);
  EXPECT_THROW(parse_config(with("p_policy", {{"override", 1.5}})), ConfigError);
  EXPECT_THROW(parse_config(with("p_policy", "optimal")), ConfigError);
  EXPECT_THROW(parse_config(with("tau_policy", {{"empirical_quantile", 1.0}})), ConfigError);
  EXPECT_THROW(parse_config(with("tau_policy", {{"fixed", 0}})), ConfigError);
  EXPECT_THROW(parse_config(with("tau_policy", {{"guess", 1}})), ConfigError);
  EXPECT_THROW(parse_config(with("data_mode", {{"bernoulli", 2.0}})), ConfigError);
  EXPECT_THROW(parse_config(with("data_mode", "random")), ConfigError);
  EXPECT_THROW(parse_config(with("sampling", "fast")), ConfigError);
  EXPECT_THROW(parse_config(with("stop_at", "never")), ConfigError);
  EXPECT_THROW(parse_config(with("alpha", 0)), ConfigError);
  EXPECT_THROW(parse_config(with("threads", 0)), ConfigError);
  EXPECT_THROW(parse_config(with("max_slots", -5)), ConfigError);
}

TEST(Config, LoadErrors) {
  EXPECT_THROW(load_config("/nonexistent/dir/cfg.json"), IoError);
  const fs::path dir = scratch_dir("load");
  std::ofstream(dir / "bad.json") << "{not json";
  EXPECT_THROW(load_config((dir / "bad.json").string()), ConfigError);
}

TEST(Runner, OneRecordPerSeedInConfigOrder) {
  const RunSummary s = run_config(one_shot_cfg({1000}, 50));
  ASSERT_EQ(s.records.size(), 50u);
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_EQ(s.records[i].seed, i + 1);
    EXPECT_EQ(s.records[i].n, 1000u);
    EXPECT_TRUE(s.records[i].complete);
  }
}

TEST(Runner, SameConfigSameBytes) {
  const ExperimentConfig cfg = one_shot_cfg({200, 300}, 6);
  EXPECT_EQ(to_csv(run_config(cfg).records), to_csv(run_config(cfg).records));
}

TEST(Runner, ParallelMatchesSequential) {
  ExperimentConfig cfg = one_shot_cfg({200, 300, 400}, 5);
  const std::string sequential = to_csv(run_config(cfg).records);
  cfg.threads = 4;
  EXPECT_EQ(to_csv(run_config(cfg).records), sequential);
}

TEST(Runner, IncompleteRunsAreKept) {
  ExperimentConfig cfg = one_shot_cfg({500}, 4);
  cfg.max_slots = 10;
  const RunSummary s = run_config(cfg);
  ASSERT_EQ(s.records.size(), 4u);
  for (const auto &r : s.records) {
    EXPECT_FALSE(r.complete);
    EXPECT_FALSE(r.T_sink.has_value());
    EXPECT_FALSE(r.correct.has_value());
    EXPECT_FALSE(r.note.empty());
  }
}

TEST(Runner, EmpiricalTauIsCalibratedAndRecorded) {
  const ExperimentConfig cfg = parse_config(json{
      {"protocol", "hops"},
      {"n_list", {300}},
      {"seeds", {{"first", 1}, {"count", 3}}},
      {"tau_policy", {{"empirical_quantile", {{"q", 0.999}, {"calibration_runs", 4}}}}}});
  const RunSummary s = run_config(cfg);
  ASSERT_EQ(s.tau_by_n.count(300), 1u);
  const std::int64_t tau = s.tau_by_n.at(300);
  EXPECT_EQ(tau, calibrate_tau(cfg, setup_network(cfg, 300)));
  for (const auto &r : s.records) {
    EXPECT_EQ(r.tau, tau);
    EXPECT_EQ(r.hops_below_bfs, 0);
    EXPECT_TRUE(r.hop_match_frac.has_value());
  }
}

TEST(Runner, PipelinedRecordsRounds) {
  const ExperimentConfig cfg = parse_config(json{{"protocol", "pipelined"},
                                                 {"n_list", {100}},
                                                 {"seeds", {1, 2}},
                                                 {"rounds", 7},
                                                 {"data_mode", {{"bernoulli", 0.01}}},
                                                 {"hop_source", "oracle"},
                                                 {"tau_policy", {{"fixed", 2000}}}});
  const RunSummary s = run_config(cfg);
  for (const auto &r : s.records) {
    ASSERT_TRUE(r.complete) << r.note;
    EXPECT_EQ(r.rounds_total, 7);
    EXPECT_EQ(r.round_full_success.size(), 7u + hop_ceiling(100));
    EXPECT_EQ(r.output_matches.size(), 7u);
    EXPECT_EQ(r.hop_match_frac, 1.0);
    EXPECT_EQ(r.tau, 2000);
  }
}

TEST(Runner, BoundsRowsComeFromTheAnalysis) {
  const ExperimentConfig cfg =
      parse_config(json{{"protocol", "bounds"}, {"n_list", {250, 1000}}});
  const RunSummary s = run_config(cfg);
  ASSERT_EQ(s.records.size(), 2u);
  const PhaseBounds b = phase_bounds(analysis_constants(1000));
  EXPECT_EQ(s.records[1].T_phase1, b.v1);
  EXPECT_EQ(s.records[1].T_sink, b.total());
  EXPECT_FALSE(s.records[1].seed.has_value());
}

TEST(Runner, NearestRankQuantile) {
  EXPECT_EQ(quantile_nearest_rank({5, 1, 4, 2, 3}, 0.5), 3);
  EXPECT_EQ(quantile_nearest_rank({5, 1, 4, 2, 3}, 0.999), 5);
  EXPECT_EQ(quantile_nearest_rank({5, 1, 4, 2, 3}, 0.0), 1);
  EXPECT_THROW(quantile_nearest_rank({}, 0.5), std::domain_error);
}

TEST(Scaling, ConstantAgainstConstantHasUnitSpread) {
  std::vector<RunRecord> recs;
  for (const std::size_t n : {100u, 200u, 400u}) {
    for (int s = 0; s < 3; ++s) {
      recs.push_back(record(n, 7));
    }
  }
  const ScalingFit fit = fit_scaling(recs, Metric::T_sink, ScalingModel::constant);
  EXPECT_DOUBLE_EQ(fit.spread, 1.0);
  ASSERT_EQ(fit.points.size(), 3u);
  EXPECT_DOUBLE_EQ(fit.points[0].ratio, 7.0);
}

TEST(Scaling, MediansAgainstModel) {
  std::vector<RunRecord> recs;
  for (const std::size_t n : {100u, 1000u, 10000u}) {
    const double model = std::sqrt(n / std::log(static_cast<double>(n)));
    recs.push_back(record(n, 3000 * model));
    recs.push_back(record(n, 2000 * model));
    recs.push_back(record(n, 1e6 * model));
  }
  const ScalingFit fit = fit_scaling(recs, Metric::T_sink, ScalingModel::sqrt_n_over_log);
  EXPECT_NEAR(fit.spread, 1.0, 1e-3);
  EXPECT_NEAR(fit.points[1].ratio, 3000.0, 1.0);
}

TEST(Scaling, NeedsThreeSizes) {
  std::vector<RunRecord> recs = {record(100, 1), record(200, 1)};
  EXPECT_THROW(fit_scaling(recs, Metric::T_sink, ScalingModel::constant), std::domain_error);
  recs.push_back(record(300, 1));
  recs.back().T_sink.reset();
  EXPECT_THROW(fit_scaling(recs, Metric::T_sink, ScalingModel::constant), std::domain_error);
}

TEST(Scaling, TransmissionsPerSimulatedRound) {
  RunRecord r;
  r.protocol = "pipelined";
  r.n = 1000;
  r.total_tx = 3600;
  r.rounds_total = 20;
  EXPECT_DOUBLE_EQ(*metric_value(r, Metric::tx_per_round), 100.0); // 20 + d = 36 rounds
}

TEST(Report, CsvSchema) {
  RunRecord r;
  r.protocol = "one_shot";
  r.n = 250;
  r.seed = 4;
  r.p = 0.25;
  r.T_sink = 17;
  r.correct = true;
  const std::string csv = to_csv({r});
  EXPECT_EQ(line_count(csv), 2u);
  EXPECT_EQ(csv, std::string(kCsvHeader) + "\none_shot,250,4,0.25,,,17,,,true,,,,\n");
  EXPECT_EQ(std::string(kCsvHeader),
            "protocol,n,seed,p,tau,T_phase1,T_sink,T_all,total_tx,correct,hop_match_frac,"
            "rounds_ok,rounds_total,wallclock_ms");
}

TEST(Report, JsonRoundTripsThroughCsv) {
  const RunSummary s = run_config(one_shot_cfg({100, 150}, 3));
  const std::string csv = to_csv(s.records);
  const json j = to_json(s.records);
  ASSERT_EQ(j.size(), s.records.size());
  EXPECT_TRUE(j[0]["tau"].is_null());
  EXPECT_EQ(to_csv(records_from_json(json::parse(j.dump()))), csv);
  EXPECT_THROW(records_from_json(json::object()), ConfigError);
}

TEST(Report, OneSvgPerProtocolMetric) {
  const RunSummary s = run_config(one_shot_cfg({100, 200, 300, 400, 500}, 10));
  ASSERT_EQ(s.records.size(), 50u);
  const fs::path dir = scratch_dir("svg");
  const auto written = report(s.records, ReportFormat::svg, dir.string());
  EXPECT_EQ(written.size(), plotted_metrics("one_shot").size());
  std::size_t files = 0;
  for (const auto &entry : fs::directory_iterator(dir)) {
    ++files;
    std::ifstream in(entry.path());
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(ss.str().rfind("<svg", 0), 0u);
    EXPECT_NE(ss.str().find("</svg>"), std::string::npos);
  }
  EXPECT_EQ(files, written.size());
}

TEST(Report, ErrorsNameThePath) {
  const std::vector<RunRecord> recs = {record(100, 1)};
  try {
    report(recs, ReportFormat::csv, "/nonexistent/dir/out.csv");
    FAIL() << "expected IoError";
  } catch (const IoError &e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/out.csv"), std::string::npos);
  }
  EXPECT_THROW(report({}, ReportFormat::csv, "x.csv"), ConfigError);
  EXPECT_THROW(load_records("/nonexistent/records.json"), IoError);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch_dir("cli");
  const auto good = dir / "good.json";
  std::ofstream(good) << R"({"protocol":"one_shot","n_list":[100],"seeds":[1],
    "p_policy":{"inverse_log":8},"output":{"json":")"
                      << (dir / "out.json").string() << R"("}})";
  const auto bad = dir / "bad.json";
  std::ofstream(bad) << R"({"protocol":"one_shot","n_list":[10],"seeds":[1]})";
  const auto unwritable = dir / "unwritable.json";
  std::ofstream(unwritable) << R"({"protocol":"one_shot","n_list":[100],"seeds":[1],
    "p_policy":{"inverse_log":8},"output":{"csv":"/nonexistent/dir/x.csv"}})";

  EXPECT_EQ(run_cli("sweep --config " + good.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "out.json"));
  EXPECT_EQ(run_cli("report --in " + (dir / "out.json").string() + " --format csv --out " +
                    (dir / "out.csv").string()),
            0);
  EXPECT_EQ(run_cli("report --in " + (dir / "out.json").string() + " --format svg --out " +
                    (dir / "plots").string()),
            0);
  EXPECT_EQ(run_cli("sweep --config " + bad.string()), 1);
  EXPECT_EQ(run_cli("sweep --config " + unwritable.string()), 2);
  EXPECT_EQ(run_cli("sweep --config " + (dir / "missing.json").string()), 2);
  EXPECT_EQ(run_cli("report --in " + (dir / "out.json").string() + " --format xml"), 1);
  EXPECT_EQ(run_cli("bounds --n 1000"), 0);
  EXPECT_EQ(run_cli("bounds --n 8"), 1);
  EXPECT_EQ(run_cli("deploy --n 100 --seed 3"), 0);
  EXPECT_EQ(run_cli("oneshot --n 100 --seed 3"), 0);
  EXPECT_EQ(run_cli("hops --n 100 --seed 3 --tau 500"), 0);
  EXPECT_EQ(run_cli("pipelined --n 100 --seed 3 --tau 500 --rounds 3"), 0);
}
