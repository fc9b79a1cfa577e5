#pragma once

// CSV / JSON / SVG output of run records.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "maxnet/harness/config.hpp"
#include "maxnet/harness/runner.hpp"
#include "maxnet/harness/scaling.hpp"

namespace maxnet::harness {

inline constexpr const char *kCsvHeader =
    "protocol,n,seed,p,tau,T_phase1,T_sink,T_all,total_tx,correct,hop_match_frac,rounds_ok,"
    "rounds_total,wallclock_ms";

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T> std::string cell(const std::optional<T> &v) {
  if (!v) {
    return "";
  }
  if constexpr (std::is_same_v<T, bool>) {
    return *v ? "true" : "false";
  } else if constexpr (std::is_floating_point_v<T>) {
    return format_double(*v);
  } else {
    return std::to_string(*v);
  }
}

template <class T> nlohmann::json json_value(const std::optional<T> &v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <class T> std::optional<T> json_optional(const nlohmann::json &j, const char *key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    return std::nullopt;
  }
  return it->get<T>();
}

} // namespace detail

inline void write_csv(const std::vector<RunRecord> &records, std::ostream &os) {
  using detail::cell;
  os << kCsvHeader << '\n';
  for (const auto &r : records) {
    os << r.protocol << ',' << r.n << ',' << cell(r.seed) << ',' << detail::format_double(r.p)
       << ',' << cell(r.tau) << ',' << cell(r.T_phase1) << ',' << cell(r.T_sink) << ','
       << cell(r.T_all) << ',' << cell(r.total_tx) << ',' << cell(r.correct) << ','
       << cell(r.hop_match_frac) << ',' << cell(r.rounds_ok) << ',' << cell(r.rounds_total)
       << ',' << cell(r.wallclock_ms) << '\n';
  }
}

inline std::string to_csv(const std::vector<RunRecord> &records) {
  std::ostringstream os;
  write_csv(records, os);
  return os.str();
}

inline nlohmann::json to_json(const std::vector<RunRecord> &records) {
  using detail::json_value;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto &r : records) {
    arr.push_back({{"protocol", r.protocol},
                   {"n", r.n},
                   {"seed", json_value(r.seed)},
                   {"p", r.p},
                   {"tau", json_value(r.tau)},
                   {"T_phase1", json_value(r.T_phase1)},
                   {"T_sink", json_value(r.T_sink)},
                   {"T_all", json_value(r.T_all)},
                   {"total_tx", json_value(r.total_tx)},
                   {"correct", json_value(r.correct)},
                   {"hop_match_frac", json_value(r.hop_match_frac)},
                   {"rounds_ok", json_value(r.rounds_ok)},
                   {"rounds_total", json_value(r.rounds_total)},
                   {"wallclock_ms", json_value(r.wallclock_ms)}});
  }
  return arr;
}

inline std::vector<RunRecord> records_from_json(const nlohmann::json &arr) {
  using detail::json_optional;
  if (!arr.is_array()) {
    throw ConfigError("records file must hold a JSON array");
  }
  std::vector<RunRecord> records;
  try {
    for (const auto &j : arr) {
      RunRecord r;
      r.protocol = j.at("protocol").get<std::string>();
      r.n = j.at("n").get<std::size_t>();
      r.seed = json_optional<std::uint64_t>(j, "seed");
      r.p = j.at("p").get<double>();
      r.tau = json_optional<std::int64_t>(j, "tau");
      r.T_phase1 = json_optional<std::int64_t>(j, "T_phase1");
      r.T_sink = json_optional<std::int64_t>(j, "T_sink");
      r.T_all = json_optional<std::int64_t>(j, "T_all");
      r.total_tx = json_optional<std::int64_t>(j, "total_tx");
      r.correct = json_optional<bool>(j, "correct");
      r.hop_match_frac = json_optional<double>(j, "hop_match_frac");
      r.rounds_ok = json_optional<std::int64_t>(j, "rounds_ok");
      r.rounds_total = json_optional<std::int64_t>(j, "rounds_total");
      r.wallclock_ms = json_optional<double>(j, "wallclock_ms");
      records.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(std::string("malformed records file: ") + e.what());
  }
  return records;
}

inline std::vector<RunRecord> load_records(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot read records file: " + path);
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError("records file " + path + " is not valid JSON: " + e.what());
  }
  return records_from_json(j);
}

inline void write_text(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write file: " + path);
  }
  out << text;
  if (!out) {
    throw IoError("write failed: " + path);
  }
}

/// Metrics plotted for each protocol, with the model drawn over them.
inline std::vector<std::pair<Metric, ScalingModel>> plotted_metrics(const std::string &protocol) {
  if (protocol == "one_shot") {
    return {{Metric::T_phase1, ScalingModel::log2},
            {Metric::T_sink, ScalingModel::sqrt_n_over_log},
            {Metric::T_all, ScalingModel::sqrt_n_over_log},
            {Metric::total_tx, ScalingModel::n_three_halves}};
  }
  if (protocol == "pipelined") {
    return {{Metric::tx_per_round, ScalingModel::n_log_n}};
  }
  if (protocol == "hops") {
    return {{Metric::total_tx, ScalingModel::n_log_n}};
  }
  if (protocol == "bounds") {
    return {{Metric::T_phase1, ScalingModel::log2}, {Metric::T_sink, ScalingModel::sqrt_n_over_log}};
  }
  return {};
}

/// Log-log scatter of metric against n with the model scaled through the
/// geometric mean of the per-point ratios.
inline std::string render_svg(const std::vector<RunRecord> &records, const std::string &protocol,
                              Metric metric, ScalingModel model) {
  std::vector<std::pair<double, double>> pts;
  for (const auto &r : records) {
    if (r.protocol != protocol) {
      continue;
    }
    if (const auto v = metric_value(r, metric); v && *v > 0.0) {
      pts.emplace_back(static_cast<double>(r.n), *v);
    }
  }
  const double width = 640;
  const double height = 480;
  const double margin = 60;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\">"
     << protocol << ": " << to_string(metric) << " vs n (model " << to_string(model)
     << ")</text>\n";
  if (pts.empty()) {
    os << "</svg>\n";
    return os.str();
  }
  double log_scale = 0.0;
  for (const auto &[n, v] : pts) {
    log_scale += std::log(v / model_value(model, n));
  }
  log_scale /= static_cast<double>(pts.size());
  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  for (const auto &[n, v] : pts) {
    x_lo = std::min(x_lo, std::log10(n));
    x_hi = std::max(x_hi, std::log10(n));
    y_lo = std::min(y_lo, std::log10(v));
    y_hi = std::max(y_hi, std::log10(v));
  }
  const double model_lo = std::log10(std::exp(log_scale) * model_value(model, std::pow(10, x_lo)));
  const double model_hi = std::log10(std::exp(log_scale) * model_value(model, std::pow(10, x_hi)));
  y_lo = std::min({y_lo, model_lo, model_hi}) - 0.1;
  y_hi = std::max({y_hi, model_lo, model_hi}) + 0.1;
  if (x_hi - x_lo < 1e-9) {
    x_lo -= 0.1;
    x_hi += 0.1;
  }
  auto px = [&](double lx) { return margin + (lx - x_lo) / (x_hi - x_lo) * (width - 2 * margin); };
  auto py = [&](double ly) {
    return height - margin - (ly - y_lo) / (y_hi - y_lo) * (height - 2 * margin);
  };
  os << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
     << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
     << height - margin << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"" << height - 15
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\">log10 n</text>\n";
  os << "<text x=\"15\" y=\"" << height / 2 << "\" font-family=\"sans-serif\" transform=\"rotate(-90 15 "
     << height / 2 << ")\">log10 " << to_string(metric) << "</text>\n";
  os << "<polyline fill=\"none\" stroke=\"red\" points=\"";
  constexpr int kSteps = 32;
  for (int s = 0; s <= kSteps; ++s) {
    const double lx = x_lo + (x_hi - x_lo) * s / kSteps;
    const double ly = std::log10(std::exp(log_scale) * model_value(model, std::pow(10, lx)));
    os << detail::format_double(px(lx)) << ',' << detail::format_double(py(ly)) << ' ';
  }
  os << "\"/>\n";
  for (const auto &[n, v] : pts) {
    os << "<circle cx=\"" << detail::format_double(px(std::log10(n))) << "\" cy=\""
       << detail::format_double(py(std::log10(v))) << "\" r=\"3\" fill=\"steelblue\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

/// One SVG per (protocol, metric) pair present in the records. Returns the
/// written paths.
inline std::vector<std::string> write_svgs(const std::vector<RunRecord> &records,
                                           const std::string &dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create directory: " + dir);
  }
  std::vector<std::string> protocols;
  for (const auto &r : records) {
    if (std::find(protocols.begin(), protocols.end(), r.protocol) == protocols.end()) {
      protocols.push_back(r.protocol);
    }
  }
  std::vector<std::string> written;
  for (const auto &protocol : protocols) {
    for (const auto &[metric, model] : plotted_metrics(protocol)) {
      const auto path =
          (std::filesystem::path(dir) / (protocol + "_" + to_string(metric) + ".svg")).string();
      write_text(path, render_svg(records, protocol, metric, model));
      written.push_back(path);
    }
  }
  return written;
}

enum class ReportFormat { csv, json, svg };

/// Writes records in `format`. For csv/json `path` is a file, for svg a
/// directory. Returns the written paths.
inline std::vector<std::string> report(const std::vector<RunRecord> &records, ReportFormat format,
                                       const std::string &path) {
  if (records.empty()) {
    throw ConfigError("no records to report");
  }
  switch (format) {
  case ReportFormat::csv:
    write_text(path, to_csv(records));
    return {path};
  case ReportFormat::json:
    write_text(path, to_json(records).dump(2) + "\n");
    return {path};
  case ReportFormat::svg:
    return write_svgs(records, path);
  }
  return {};
}

} // namespace maxnet::harness
