#pragma once

// Analytic completion-time thresholds for one-shot diffusion and the
// random variables that dominate the per-phase completion times.
//
// All logarithms are natural. Everything is evaluated in the log domain so
// n up to 1e9 stays finite.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "maxnet/geometry.hpp"
#include "maxnet/rng.hpp"

namespace maxnet {

struct AnalysisConstants {
  std::size_t n = 0;
  double c1 = kC1;
  double c2 = kC2;
  double ln_n = 0.0;
  int m = 0;          // ceil(c2 ln n), per-cell occupancy ceiling
  int k1 = 0;         // cells in the interference square
  double p = 0.0;     // 1 / (k1 c2 ln n)
  double p_s = 0.0;   // c1 / (k1 c2 e), per-cell success floor
  int l_n = 0;        // cells per side
  long long M_n = 0;  // total cells
  int w = 0;          // l_n - 1
  int d = 0;          // 2 l_n, hop-distance ceiling
};

inline AnalysisConstants analysis_constants(std::size_t n, double delta_prime = 0.0) {
  const GridParams grid = tessellate(n);
  const RadioParams radio = radio_params(n, delta_prime);
  AnalysisConstants c;
  c.n = n;
  c.ln_n = std::log(static_cast<double>(n));
  c.m = static_cast<int>(std::ceil(kC2 * c.ln_n));
  c.k1 = radio.k1;
  c.p = radio.p;
  c.p_s = kC1 / (static_cast<double>(radio.k1) * kC2 * std::numbers::e);
  c.l_n = grid.cells_per_side;
  c.M_n = static_cast<long long>(grid.cells_per_side) * grid.cells_per_side;
  c.w = c.l_n - 1;
  c.d = 2 * c.l_n;
  return c;
}

/// ln c_m where c_m = 2^{2m} / (C(2m,m) sqrt(pi m)).
inline double log_cm(int m) {
  if (m < 1) {
    throw std::domain_error("c_m requires m >= 1");
  }
  const double md = static_cast<double>(m);
  return 2.0 * md * std::numbers::ln2 - std::lgamma(2.0 * md + 1.0) +
         2.0 * std::lgamma(md + 1.0) - 0.5 * std::log(std::numbers::pi * md);
}

inline double cm(int m) { return std::exp(log_cm(m)); }

/// E[exp(s1 T_c)] at s1 = ln(1/(1 - p_S/2m)), closed form c_m sqrt(pi m).
inline double mgf_tc_closed(int m, double p_s) {
  if (!(p_s > 0.0 && p_s < 1.0)) {
    throw std::domain_error("p_S must lie in (0,1)");
  }
  return cm(m) * std::sqrt(std::numbers::pi * m);
}

/// E[exp(s T_c)] from the product form
///   m! p_S^m / prod_l (m[e^{-s} - (1-p_S)] - (l-1) p_S),
/// valid for s < ln(1/(1 - p_S/m)).
inline double mgf_tc_product(int m, double p_s, double s) {
  const double md = static_cast<double>(m);
  // e^{-s} - (1 - p_S), computed without cancellation for tiny s.
  const double base = std::expm1(-s) + p_s;
  double log_value = std::lgamma(md + 1.0) + md * std::log(p_s);
  for (int l = 1; l <= m; ++l) {
    const double factor = md * base - (l - 1) * p_s;
    if (!(factor > 0.0)) {
      throw std::domain_error("s outside the region of convergence");
    }
    log_value -= std::log(factor);
  }
  return std::exp(log_value);
}

inline double s1_of(int m, double p_s) { return -std::log1p(-p_s / (2.0 * m)); }
inline double s2_of(double p_s) { return -std::log1p(-p_s / 2.0); }

/// E[exp(s T^(C))] = p_S^w / (e^{-s} - (1-p_S))^w, valid for s < ln(1/(1-p_S)).
inline double mgf_tcol(int w, double p_s, double s) {
  const double base = std::expm1(-s) + p_s;
  if (!(base > 0.0)) {
    throw std::domain_error("s outside the region of convergence");
  }
  return std::exp(w * (std::log(p_s) - std::log(base)));
}

struct PhaseBounds {
  double alpha = 1.0;
  double k = 1.0;
  double s1 = 0.0;
  double s2 = 0.0;
  std::int64_t v1 = 0;
  std::int64_t v2 = 0;
  std::int64_t v3 = 0;

  std::int64_t total() const { return v1 + v2 + v3; }
};

namespace detail {

// Smallest integer V >= 1 with V * step <= budget, where step < 0 is the
// per-slot log decay and budget the allowed log tail. The ceiling is
// corrected against the inequality itself to be exact to the slot.
inline std::int64_t smallest_satisfying(double numerator, double decay) {
  auto satisfies = [&](std::int64_t v) { return static_cast<double>(v) * decay >= numerator; };
  auto v = static_cast<std::int64_t>(std::ceil(numerator / decay));
  v = std::max<std::int64_t>(v, 1);
  while (v > 1 && satisfies(v - 1)) {
    --v;
  }
  while (!satisfies(v)) {
    ++v;
  }
  return v;
}

inline void check_confidence(double alpha, double k) {
  if (!(alpha > 0.0) || !(k > 0.0)) {
    throw std::domain_error("alpha and k must be positive");
  }
}

} // namespace detail

/// Phase I: M_n c_m sqrt(pi m) (1 - p_S/2m)^{V1} <= k / n^alpha.
inline std::int64_t v1_bound(const AnalysisConstants &c, double alpha, double k) {
  detail::check_confidence(alpha, k);
  const double numerator = 0.5 * std::log(static_cast<double>(c.m)) +
                           std::log(static_cast<double>(c.M_n)) + alpha * c.ln_n - std::log(k) +
                           0.5 * std::log(std::numbers::pi) + log_cm(c.m);
  return detail::smallest_satisfying(numerator, s1_of(c.m, c.p_s));
}

/// Phase II: l_n 2^w (1 - p_S/2)^{V2} <= k / n^alpha.
inline std::int64_t v2_bound(const AnalysisConstants &c, double alpha, double k) {
  detail::check_confidence(alpha, k);
  const double numerator = alpha * c.ln_n + std::log(static_cast<double>(c.l_n)) +
                           c.w * std::numbers::ln2 - std::log(k);
  return detail::smallest_satisfying(numerator, s2_of(c.p_s));
}

/// Phase III: 2^w (1 - p_S/2)^{V3} <= k / n^alpha.
inline std::int64_t v3_bound(const AnalysisConstants &c, double alpha, double k) {
  detail::check_confidence(alpha, k);
  const double numerator = alpha * c.ln_n + c.w * std::numbers::ln2 - std::log(k);
  return detail::smallest_satisfying(numerator, s2_of(c.p_s));
}

inline std::int64_t v1_bound(std::size_t n, double alpha, double k, double delta_prime = 0.0) {
  return v1_bound(analysis_constants(n, delta_prime), alpha, k);
}
inline std::int64_t v2_bound(std::size_t n, double alpha, double k, double delta_prime = 0.0) {
  return v2_bound(analysis_constants(n, delta_prime), alpha, k);
}
inline std::int64_t v3_bound(std::size_t n, double alpha, double k, double delta_prime = 0.0) {
  return v3_bound(analysis_constants(n, delta_prime), alpha, k);
}

inline PhaseBounds phase_bounds(const AnalysisConstants &c, double alpha = 1.0, double k = 1.0) {
  PhaseBounds b;
  b.alpha = alpha;
  b.k = k;
  b.s1 = s1_of(c.m, c.p_s);
  b.s2 = s2_of(c.p_s);
  b.v1 = v1_bound(c, alpha, k);
  b.v2 = v2_bound(c, alpha, k);
  b.v3 = v3_bound(c, alpha, k);
  return b;
}

/// T_c = sum_{j=1}^{R_c} Geom(p_S), R_c = sum_{l=1}^{m} Geom(1 - (l-1)/m).
inline std::int64_t sample_Tc(int m, double p_s, Rng &rng) {
  if (m < 1 || !(p_s > 0.0 && p_s <= 1.0)) {
    throw std::domain_error("sample_Tc requires m >= 1 and p_S in (0,1]");
  }
  std::int64_t draws = 0;
  for (int l = 1; l <= m; ++l) {
    draws += sample_geometric(1.0 - static_cast<double>(l - 1) / m, rng);
  }
  std::int64_t total = 0;
  for (std::int64_t j = 0; j < draws; ++j) {
    total += sample_geometric(p_s, rng);
  }
  return total;
}

/// T^(C) = sum_{j=1}^{w} Geom(p_S).
inline std::int64_t sample_Tcol(int w, double p_s, Rng &rng) {
  if (w < 1 || !(p_s > 0.0 && p_s <= 1.0)) {
    throw std::domain_error("sample_Tcol requires w >= 1 and p_S in (0,1]");
  }
  std::int64_t total = 0;
  for (int j = 0; j < w; ++j) {
    total += sample_geometric(p_s, rng);
  }
  return total;
}

struct DominanceRow {
  double quantile = 0.0;
  double z = 0.0;
  double sim_tail = 0.0;   // P(sim >= z)
  double model_tail = 0.0; // P(model >= z)
  double diff = 0.0;       // sim_tail - model_tail
  double se = 0.0;         // pooled two-sample binomial standard error
  bool violation = false;
};

struct DominanceReport {
  std::vector<DominanceRow> rows;
  bool any_violation = false;
};

/// Checks P(sim >= z) <= P(model >= z) at the requested quantiles of the
/// pooled sample, flagging excesses beyond `tolerance_se` standard errors.
inline DominanceReport dominance_check(std::vector<double> sim, std::vector<double> model,
                                       const std::vector<double> &quantiles,
                                       double tolerance_se = 3.0) {
  if (sim.empty() || model.empty()) {
    throw std::domain_error("dominance_check needs nonempty samples");
  }
  std::sort(sim.begin(), sim.end());
  std::sort(model.begin(), model.end());
  std::vector<double> pooled;
  pooled.reserve(sim.size() + model.size());
  std::merge(sim.begin(), sim.end(), model.begin(), model.end(), std::back_inserter(pooled));
  auto tail = [](const std::vector<double> &sorted, double z) {
    const auto below = std::lower_bound(sorted.begin(), sorted.end(), z) - sorted.begin();
    return static_cast<double>(static_cast<std::ptrdiff_t>(sorted.size()) - below) /
           static_cast<double>(sorted.size());
  };
  const double n1 = static_cast<double>(sim.size());
  const double n2 = static_cast<double>(model.size());
  DominanceReport report;
  for (const double q : quantiles) {
    if (!(q >= 0.0 && q <= 1.0)) {
      throw std::domain_error("quantile outside [0,1]");
    }
    const auto idx = std::min(pooled.size() - 1,
                              static_cast<std::size_t>(std::floor(q * static_cast<double>(pooled.size()))));
    DominanceRow row;
    row.quantile = q;
    row.z = pooled[idx];
    row.sim_tail = tail(sim, row.z);
    row.model_tail = tail(model, row.z);
    row.diff = row.sim_tail - row.model_tail;
    const double pooled_tail = (row.sim_tail * n1 + row.model_tail * n2) / (n1 + n2);
    row.se = std::sqrt(pooled_tail * (1.0 - pooled_tail) * (1.0 / n1 + 1.0 / n2));
    row.violation = row.diff > tolerance_se * row.se && row.diff > 0.0;
    report.any_violation = report.any_violation || row.violation;
    report.rows.push_back(row);
  }
  return report;
}

inline std::vector<double> deciles() {
  return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
}

} // namespace maxnet
