#ifndef CVQKD_OPTIMIZE_HPP
#define CVQKD_OPTIMIZE_HPP

#include <functional>
#include <string>

#include "security.hpp"

// Parameter optimization (gain, Bob's trusted added noise) and security
// threshold solvers.

namespace cvqkd {

struct OptResult {
  double arg = 0.0;
  double value = 0.0;
};

namespace detail {

// Golden-section maximization on [lo, hi] to absolute argument tolerance.
inline OptResult golden_max(const std::function<double(double)>& f, double lo, double hi,
                            double tol) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double xm = 0.5 * (a + b);
  return {xm, f(xm)};
}

// 1-D maximization: fixed pre-scan, then golden-section refinement around the
// grid argmax (ties broken toward the smaller argument). Correct for
// unimodal objectives; for non-unimodal ones it degrades gracefully to
// grid-argmax + local refinement.
inline OptResult scan_then_golden(const std::function<double(double)>& f,
                                  const std::vector<double>& grid, double tol) {
  int best = 0;
  std::vector<double> vals(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) {
    vals[i] = f(grid[i]);
    if (vals[i] > vals[best]) best = static_cast<int>(i);
  }
  const double lo = grid[best > 0 ? best - 1 : 0];
  const double hi = grid[best + 1 < static_cast<int>(grid.size()) ? best + 1
                                                                  : static_cast<int>(grid.size()) - 1];
  if (hi - lo < tol) return {grid[best], vals[best]};
  OptResult r = golden_max(f, lo, hi, tol);
  if (vals[best] > r.value) return {grid[best], vals[best]};
  return r;
}

}  // namespace detail

// Maximize the key rate over the gain g in [0, g_max]. The Holevo bound does
// not depend on g (a local operation on Alice's trusted arm), so it is
// computed once and only I_AB(g) is scanned.
inline OptResult optimize_gain(const ProtocolParams& p, const ChannelParams& c,
                               const DetectorParams& d, double tol = 1e-5) {
  p.validate();
  ProtocolParams q = p;
  q.g = std::min(1.0, p.g_max);  // any valid g; chi is g-independent
  const double chi = chi_be(q, c, d);
  const auto rate = [&](double g) {
    ProtocolParams pg = p;
    pg.g = g;
    return i_ab_analytic(pg, c, d) - chi;
  };
  std::vector<double> grid(33);
  for (int i = 0; i <= 32; ++i) grid[i] = p.g_max * i / 32.0;
  return detail::scan_then_golden(rate, grid, tol);
}

// Maximize the key rate over Bob's trusted added noise in [0, 50] SNU:
// coarse log grid, then golden-section refinement, tolerance 1e-4 SNU.
inline OptResult optimize_bob_noise(const ProtocolParams& p, const ChannelParams& c,
                                    const DetectorParams& d, double tol = 1e-4) {
  const auto rate = [&](double noise) {
    DetectorParams dn = d;
    dn.trusted_added_noise = noise;
    return key_rate(p, c, dn).key_rate;
  };
  std::vector<double> grid = {0.0};
  for (int i = 0; i <= 24; ++i) grid.push_back(std::pow(10.0, -2.0 + (std::log10(50.0) + 2.0) * i / 24.0));
  return detail::scan_then_golden(rate, grid, tol);
}

struct OptimizedRate {
  double g = 0.0;
  double bob_noise = 0.0;
  double key_rate = 0.0;
  double i_ab = 0.0;
  double chi_be = 0.0;
};

// Coordinate descent over (g, Bob's added noise), two cycles; either
// coordinate can be pinned to its input value.
inline OptimizedRate optimize_rate(const ProtocolParams& p, const ChannelParams& c,
                                   const DetectorParams& d, bool opt_g, bool opt_noise,
                                   int cycles = 2) {
  ProtocolParams pc = p;
  DetectorParams dc = d;
  for (int cycle = 0; cycle < (opt_g || opt_noise ? cycles : 1); ++cycle) {
    if (opt_g) pc.g = optimize_gain(pc, c, dc).arg;
    if (opt_noise) dc.trusted_added_noise = optimize_bob_noise(pc, c, dc).arg;
    if (!opt_g && !opt_noise) break;
  }
  const SecurityReport r = key_rate(pc, c, dc);
  return {pc.g, dc.trusted_added_noise, r.key_rate, r.i_ab, r.chi_be};
}

struct ThresholdResult {
  double value = 0.0;  // epsilon in SNU, or loss in dB (km = dB / db_per_km)
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double residual_rate = 0.0;  // key rate re-evaluated at the threshold
  int iterations = 0;
  double g_opt = 0.0;
  double noise_opt = 0.0;
  bool cap_hit = false;
  double km = 0.0;  // loss thresholds only
};

// Largest channel excess noise with non-negative (optimized) key rate at
// fixed eta. Bisection to 1e-4 SNU with the inner optimization re-run at
// every probe; the initial [0, 5] bracket expands geometrically.
inline ThresholdResult tolerable_excess_noise(const ProtocolParams& p, const DetectorParams& d,
                                              double eta, bool opt_g = true, bool opt_noise = true,
                                              double tol = 1e-4) {
  const auto rate = [&](double eps) {
    return optimize_rate(p, ChannelParams{eta, eps}, d, opt_g, opt_noise).key_rate;
  };
  if (!(rate(0.0) > 0.0))
    throw numerical_error("tolerable_excess_noise: key rate not positive at epsilon = 0");
  double lo = 0.0, hi = 5.0;
  int iters = 0;
  int expansions = 0;
  while (rate(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++expansions > 20)
      throw numerical_error("tolerable_excess_noise: no sign change up to epsilon = " +
                            std::to_string(lo));
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (rate(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
    ++iters;
  }
  ThresholdResult t;
  t.value = 0.5 * (lo + hi);
  t.bracket_lo = lo;
  t.bracket_hi = hi;
  t.iterations = iters;
  const OptimizedRate r = optimize_rate(p, ChannelParams{eta, t.value}, d, opt_g, opt_noise);
  t.residual_rate = r.key_rate;
  t.g_opt = r.g;
  t.noise_opt = r.bob_noise;
  return t;
}

// Largest channel loss (dB) with non-negative optimized key rate at fixed
// excess noise. Capped at 60 dB (pure-loss thresholds can be unbounded);
// cap_hit reports that case instead of a number.
inline ThresholdResult max_tolerable_loss(const ProtocolParams& p, const DetectorParams& d,
                                          double epsilon, bool opt_g = true, bool opt_noise = true,
                                          double tol_db = 0.01, double db_per_km = 0.2) {
  const auto rate = [&](double loss_db) {
    return optimize_rate(p, ChannelParams{loss_db_to_transmittance(loss_db), epsilon}, d, opt_g,
                         opt_noise)
        .key_rate;
  };
  if (!(rate(0.0) > 0.0))
    throw numerical_error("max_tolerable_loss: key rate not positive at 0 dB loss");
  ThresholdResult t;
  double lo = 0.0, hi = 60.0;
  if (rate(hi) > 0.0) {
    t.cap_hit = true;
    t.value = hi;
    t.bracket_lo = hi;
    t.bracket_hi = hi;
  } else {
    int iters = 0;
    while (hi - lo > tol_db) {
      const double mid = 0.5 * (lo + hi);
      if (rate(mid) > 0.0)
        lo = mid;
      else
        hi = mid;
      ++iters;
    }
    t.value = 0.5 * (lo + hi);
    t.bracket_lo = lo;
    t.bracket_hi = hi;
    t.iterations = iters;
  }
  const OptimizedRate r = optimize_rate(
      p, ChannelParams{loss_db_to_transmittance(t.value), epsilon}, d, opt_g, opt_noise);
  t.residual_rate = r.key_rate;
  t.g_opt = r.g;
  t.noise_opt = r.bob_noise;
  t.km = t.value / db_per_km;
  return t;
}

enum class SweepVariable { distance_km, eta, epsilon, modulation, squeezing_db };

struct SweepSpec {
  SweepVariable variable = SweepVariable::distance_km;
  double min = 0.0;
  double max = 1.0;
  int points = 2;
  bool log_spacing = false;
  ProtocolParams protocol;
  ChannelParams channel;
  DetectorParams detector;
  bool optimize_g = false;
  bool optimize_bob_noise = false;
  double db_per_km = 0.2;

  void validate() const {
    if (!(min < max)) throw std::invalid_argument("SweepSpec: min < max required");
    if (points < 2) throw std::invalid_argument("SweepSpec: points >= 2 required");
    if (log_spacing && !(min > 0.0))
      throw std::invalid_argument("SweepSpec: log spacing needs min > 0");
  }
};

struct SweepRow {
  double x = 0.0;
  double key_rate = 0.0;
  double g_opt = 0.0;
  double noise_opt = 0.0;
  double i_ab = 0.0;
  double chi_be = 0.0;
  std::string error;  // empty on success; sweep continues past failures
};

inline std::vector<SweepRow> sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<SweepRow> rows(spec.points);
  for (int i = 0; i < spec.points; ++i) {
    const double f = static_cast<double>(i) / (spec.points - 1);
    const double x = spec.log_spacing
                         ? spec.min * std::pow(spec.max / spec.min, f)
                         : spec.min + (spec.max - spec.min) * f;
    SweepRow& row = rows[i];
    row.x = x;
    ProtocolParams p = spec.protocol;
    ChannelParams c = spec.channel;
    switch (spec.variable) {
      case SweepVariable::distance_km:
        c.eta = distance_to_transmittance(x, spec.db_per_km);
        break;
      case SweepVariable::eta:
        c.eta = x;
        break;
      case SweepVariable::epsilon:
        c.epsilon = x;
        break;
      case SweepVariable::modulation:
        p.delta_v = x;
        break;
      case SweepVariable::squeezing_db:
        p.v0 = db_to_variance(x, DbSense::squeezing);
        break;
    }
    try {
      const OptimizedRate r =
          optimize_rate(p, c, spec.detector, spec.optimize_g, spec.optimize_bob_noise);
      row.key_rate = r.key_rate;
      row.g_opt = r.g;
      row.noise_opt = r.bob_noise;
      row.i_ab = r.i_ab;
      row.chi_be = r.chi_be;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  }
  return rows;
}

}  // namespace cvqkd

#endif  // CVQKD_OPTIMIZE_HPP
