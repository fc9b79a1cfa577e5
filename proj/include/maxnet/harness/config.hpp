#pragma once

// Experiment configuration and its JSON form.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "maxnet/data.hpp"
#include "maxnet/mac.hpp"
#include "maxnet/one_shot.hpp"

namespace maxnet::harness {

/// Invalid configuration. Maps to exit code 1.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Unreadable or unwritable file. Maps to exit code 2.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class Protocol { one_shot, hops, pipelined, bounds };

inline std::string to_string(Protocol p) {
  switch (p) {
  case Protocol::one_shot:
    return "one_shot";
  case Protocol::hops:
    return "hops";
  case Protocol::pipelined:
    return "pipelined";
  case Protocol::bounds:
    return "bounds";
  }
  return "?";
}

struct ProbabilityPolicy {
  enum class Kind { paper, override_value, inverse_log };
  Kind kind = Kind::paper;
  double value = 0.0; // p for override_value, c for p = 1/(c ln n)

  double resolve(std::size_t n, double paper_p) const {
    switch (kind) {
    case Kind::paper:
      return paper_p;
    case Kind::override_value:
      return value;
    case Kind::inverse_log:
      return 1.0 / (value * std::log(static_cast<double>(n)));
    }
    return paper_p;
  }
};

struct TauPolicy {
  enum class Kind { analytic, empirical_quantile, fixed };
  Kind kind = Kind::analytic;
  double alpha = 1.0;
  double k = 1.0;
  double fraction = 1.0;       // analytic: tau = max(1, floor(fraction * V1))
  double q = 0.999;            // empirical quantile
  int calibration_runs = 10;
  std::int64_t fixed_tau = 0;
};

enum class HopSource { protocol, oracle };

struct ExperimentConfig {
  Protocol protocol = Protocol::one_shot;
  std::vector<std::size_t> n_list;
  std::vector<std::uint64_t> seeds;
  std::uint64_t master_seed = 0;
  double delta_prime = 0.0;
  ProbabilityPolicy p_policy;
  TauPolicy tau_policy;
  DataMode data_mode = DataMode::single_far_corner();
  std::size_t rounds = 200; // pipelined rounds after the d warm-up rounds
  std::int64_t max_slots = 0; // 0: 4 (V1 + V2 + V3)
  double alpha = 1.0;
  double k = 1.0;
  SamplingMode sampling = SamplingMode::skip;
  StopRule stop = StopRule::all_events;
  HopSource hop_source = HopSource::protocol;
  unsigned threads = 1;
  bool record_wallclock = false;
  std::string csv_path;
  std::string json_path;
  std::string svg_dir;
};

inline void validate(const ExperimentConfig &cfg) {
  if (cfg.n_list.empty()) {
    throw ConfigError("n_list must be nonempty");
  }
  for (const auto n : cfg.n_list) {
    if (n < kMinNodes) {
      throw ConfigError("n_list entries must be >= 16 (got " + std::to_string(n) + ")");
    }
  }
  if (cfg.seeds.empty() && cfg.protocol != Protocol::bounds) {
    throw ConfigError("seeds must be nonempty");
  }
  if (!(cfg.delta_prime >= 0.0)) {
    throw ConfigError("delta_prime must be >= 0");
  }
  const auto &pp = cfg.p_policy;
  if (pp.kind == ProbabilityPolicy::Kind::override_value && !(pp.value > 0.0 && pp.value < 1.0)) {
    throw ConfigError("p override must lie in (0,1)");
  }
  if (pp.kind == ProbabilityPolicy::Kind::inverse_log && !(pp.value > 0.0)) {
    throw ConfigError("inverse_log constant must be positive");
  }
  const auto &tp = cfg.tau_policy;
  if (tp.kind == TauPolicy::Kind::empirical_quantile &&
      (!(tp.q > 0.0 && tp.q < 1.0) || tp.calibration_runs < 1)) {
    throw ConfigError("empirical_quantile needs q in (0,1) and calibration_runs >= 1");
  }
  if (tp.kind == TauPolicy::Kind::analytic &&
      (!(tp.alpha > 0.0) || !(tp.k > 0.0) || !(tp.fraction > 0.0))) {
    throw ConfigError("analytic tau needs positive alpha, k and fraction");
  }
  if (tp.kind == TauPolicy::Kind::fixed && tp.fixed_tau < 1) {
    throw ConfigError("fixed tau must be >= 1");
  }
  if (!(cfg.alpha > 0.0) || !(cfg.k > 0.0)) {
    throw ConfigError("alpha and k must be positive");
  }
  if (cfg.max_slots < 0) {
    throw ConfigError("max_slots must be >= 0");
  }
  if (cfg.protocol == Protocol::pipelined && cfg.rounds < 1) {
    throw ConfigError("pipelined runs need rounds >= 1");
  }
  if (cfg.threads < 1) {
    throw ConfigError("threads must be >= 1");
  }
}

namespace detail {

using nlohmann::json;

inline const json *find(const json &j, const char *key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

template <class T> T get_or(const json &j, const char *key, T fallback) {
  const json *v = find(j, key);
  return v ? v->get<T>() : fallback;
}

inline Protocol parse_protocol(const std::string &s) {
  if (s == "one_shot" || s == "oneshot") {
    return Protocol::one_shot;
  }
  if (s == "hops") {
    return Protocol::hops;
  }
  if (s == "pipelined") {
    return Protocol::pipelined;
  }
  if (s == "bounds") {
    return Protocol::bounds;
  }
  throw ConfigError("unknown protocol '" + s + "'");
}

inline ProbabilityPolicy parse_p_policy(const json &j) {
  ProbabilityPolicy pp;
  if (j.is_string()) {
    if (j.get<std::string>() != "paper") {
      throw ConfigError("p_policy string must be \"paper\"");
    }
    return pp;
  }
  if (const json *v = find(j, "override")) {
    pp.kind = ProbabilityPolicy::Kind::override_value;
    pp.value = v->get<double>();
  } else if (const json *v = find(j, "inverse_log")) {
    pp.kind = ProbabilityPolicy::Kind::inverse_log;
    pp.value = v->get<double>();
  } else {
    throw ConfigError("p_policy must be \"paper\", {\"override\": p} or {\"inverse_log\": c}");
  }
  return pp;
}

inline TauPolicy parse_tau_policy(const json &j) {
  TauPolicy tp;
  if (const json *v = find(j, "analytic")) {
    tp.kind = TauPolicy::Kind::analytic;
    tp.alpha = get_or(*v, "alpha", 1.0);
    tp.k = get_or(*v, "k", 1.0);
    tp.fraction = get_or(*v, "fraction", 1.0);
  } else if (const json *v = find(j, "empirical_quantile")) {
    tp.kind = TauPolicy::Kind::empirical_quantile;
    if (v->is_number()) {
      tp.q = v->get<double>();
    } else {
      tp.q = get_or(*v, "q", 0.999);
      tp.calibration_runs = get_or(*v, "calibration_runs", 10);
    }
  } else if (const json *v = find(j, "fixed")) {
    tp.kind = TauPolicy::Kind::fixed;
    tp.fixed_tau = v->get<std::int64_t>();
  } else {
    throw ConfigError("tau_policy must be analytic, empirical_quantile or fixed");
  }
  return tp;
}

inline DataMode parse_data_mode(const json &j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "single_far_corner") {
      return DataMode::single_far_corner();
    }
    if (s == "all_zero") {
      return DataMode::all_zero();
    }
    throw ConfigError("unknown data_mode '" + s + "'");
  }
  if (const json *v = find(j, "bernoulli")) {
    try {
      return DataMode::bernoulli(v->get<double>());
    } catch (const std::domain_error &e) {
      throw ConfigError(e.what());
    }
  }
  throw ConfigError("data_mode must be a name or {\"bernoulli\": q}");
}

inline std::vector<std::uint64_t> parse_seeds(const json &j) {
  std::vector<std::uint64_t> seeds;
  if (j.is_array()) {
    for (const auto &s : j) {
      seeds.push_back(s.get<std::uint64_t>());
    }
  } else {
    const auto first = get_or<std::uint64_t>(j, "first", 1);
    const auto count = get_or<std::uint64_t>(j, "count", 0);
    for (std::uint64_t s = 0; s < count; ++s) {
      seeds.push_back(first + s);
    }
  }
  return seeds;
}

} // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json &j) {
  using detail::find;
  using detail::get_or;
  ExperimentConfig cfg;
  try {
    if (!j.is_object()) {
      throw ConfigError("config must be a JSON object");
    }
    const auto *protocol = find(j, "protocol");
    if (!protocol) {
      throw ConfigError("config is missing 'protocol'");
    }
    cfg.protocol = detail::parse_protocol(protocol->get<std::string>());
    if (const auto *v = find(j, "n_list")) {
      cfg.n_list = v->get<std::vector<std::size_t>>();
    }
    if (const auto *v = find(j, "seeds")) {
      cfg.seeds = detail::parse_seeds(*v);
    }
    cfg.master_seed = get_or<std::uint64_t>(j, "master_seed", 0);
    cfg.delta_prime = get_or(j, "delta_prime", 0.0);
    if (const auto *v = find(j, "p_policy")) {
      cfg.p_policy = detail::parse_p_policy(*v);
    }
    if (const auto *v = find(j, "tau_policy")) {
      cfg.tau_policy = detail::parse_tau_policy(*v);
    }
    if (const auto *v = find(j, "data_mode")) {
      cfg.data_mode = detail::parse_data_mode(*v);
    }
    cfg.rounds = get_or<std::size_t>(j, "rounds", cfg.rounds);
    cfg.max_slots = get_or<std::int64_t>(j, "max_slots", 0);
    cfg.alpha = get_or(j, "alpha", 1.0);
    cfg.k = get_or(j, "k", 1.0);
    const auto sampling = get_or<std::string>(j, "sampling", "skip");
    if (sampling == "skip") {
      cfg.sampling = SamplingMode::skip;
    } else if (sampling == "naive") {
      cfg.sampling = SamplingMode::naive;
    } else {
      throw ConfigError("sampling must be \"skip\" or \"naive\"");
    }
    const auto stop = get_or<std::string>(j, "stop_at", "all");
    if (stop == "all") {
      cfg.stop = StopRule::all_events;
    } else if (stop == "sink") {
      cfg.stop = StopRule::sink;
    } else if (stop == "phase1") {
      cfg.stop = StopRule::phase1;
    } else {
      throw ConfigError("stop_at must be \"all\", \"sink\" or \"phase1\"");
    }
    const auto hop_source = get_or<std::string>(j, "hop_source", "protocol");
    if (hop_source == "protocol") {
      cfg.hop_source = HopSource::protocol;
    } else if (hop_source == "oracle") {
      cfg.hop_source = HopSource::oracle;
    } else {
      throw ConfigError("hop_source must be \"protocol\" or \"oracle\"");
    }
    cfg.threads = get_or<unsigned>(j, "threads", 1);
    cfg.record_wallclock = get_or(j, "record_wallclock", false);
    if (const auto *out = find(j, "output")) {
      cfg.csv_path = get_or<std::string>(*out, "csv", "");
      cfg.json_path = get_or<std::string>(*out, "json", "");
      cfg.svg_dir = get_or<std::string>(*out, "svg_dir", "");
    }
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

inline ExperimentConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot read config file: " + path);
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

} // namespace maxnet::harness
