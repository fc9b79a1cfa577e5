#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "maxnet/harness/config.hpp"
#include "maxnet/harness/runner.hpp"
#include "maxnet/hop_distance.hpp"

namespace maxnet::harness {

enum class Metric { T_phase1, T_sink, T_all, total_tx, tx_per_round };
enum class ScalingModel { sqrt_n_over_log, log2, n_three_halves, n_log_n, constant };

inline std::string to_string(Metric m) {
  switch (m) {
  case Metric::T_phase1:
    return "T_phase1";
  case Metric::T_sink:
    return "T_sink";
  case Metric::T_all:
    return "T_all";
  case Metric::total_tx:
    return "total_tx";
  case Metric::tx_per_round:
    return "tx_per_round";
  }
  return "?";
}

inline std::string to_string(ScalingModel m) {
  switch (m) {
  case ScalingModel::sqrt_n_over_log:
    return "sqrt(n/ln n)";
  case ScalingModel::log2:
    return "ln^2 n";
  case ScalingModel::n_three_halves:
    return "n^1.5/ln^1.5 n";
  case ScalingModel::n_log_n:
    return "n ln n";
  case ScalingModel::constant:
    return "1";
  }
  return "?";
}

inline double model_value(ScalingModel model, double n) {
  const double ln_n = std::log(n);
  switch (model) {
  case ScalingModel::sqrt_n_over_log:
    return std::sqrt(n / ln_n);
  case ScalingModel::log2:
    return ln_n * ln_n;
  case ScalingModel::n_three_halves:
    return std::pow(n / ln_n, 1.5);
  case ScalingModel::n_log_n:
    return n * ln_n;
  case ScalingModel::constant:
    return 1.0;
  }
  return 1.0;
}

/// Metric value of one record, if present. Pipelined transmissions per
/// round divide by every simulated round, warm-up included.
inline std::optional<double> metric_value(const RunRecord &rec, Metric metric) {
  auto as_double = [](const std::optional<std::int64_t> &v) -> std::optional<double> {
    return v ? std::optional<double>(static_cast<double>(*v)) : std::nullopt;
  };
  switch (metric) {
  case Metric::T_phase1:
    return as_double(rec.T_phase1);
  case Metric::T_sink:
    return as_double(rec.T_sink);
  case Metric::T_all:
    return as_double(rec.T_all);
  case Metric::total_tx:
    return as_double(rec.total_tx);
  case Metric::tx_per_round:
    if (rec.total_tx && rec.rounds_total) {
      const double simulated = static_cast<double>(*rec.rounds_total + hop_ceiling(rec.n));
      return static_cast<double>(*rec.total_tx) / simulated;
    }
    return std::nullopt;
  }
  return std::nullopt;
}

inline double median(std::vector<double> v) {
  if (v.empty()) {
    throw std::domain_error("median of an empty sample");
  }
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

struct ScalingPoint {
  std::size_t n = 0;
  std::size_t samples = 0;
  double median = 0.0;
  double model = 0.0;
  double ratio = 0.0;
};

struct ScalingFit {
  Metric metric = Metric::T_sink;
  ScalingModel model = ScalingModel::constant;
  std::vector<ScalingPoint> points; // ascending n
  double spread = 0.0;              // max ratio / min ratio
};

/// Median metric / model(n) per n, and the max/min spread of those ratios.
inline ScalingFit fit_scaling(const std::vector<RunRecord> &records, Metric metric,
                              ScalingModel model) {
  std::map<std::size_t, std::vector<double>> by_n;
  for (const auto &rec : records) {
    if (const auto v = metric_value(rec, metric)) {
      by_n[rec.n].push_back(*v);
    }
  }
  if (by_n.size() < 3) {
    throw std::domain_error("fit_scaling needs at least 3 distinct n values with data");
  }
  ScalingFit fit;
  fit.metric = metric;
  fit.model = model;
  double lo = INFINITY;
  double hi = 0.0;
  for (auto &[n, values] : by_n) {
    ScalingPoint pt;
    pt.n = n;
    pt.samples = values.size();
    pt.median = median(values);
    pt.model = model_value(model, static_cast<double>(n));
    pt.ratio = pt.median / pt.model;
    lo = std::min(lo, pt.ratio);
    hi = std::max(hi, pt.ratio);
    fit.points.push_back(pt);
  }
  fit.spread = lo > 0.0 ? hi / lo : INFINITY;
  return fit;
}

} // namespace maxnet::harness
