#ifndef CVQKD_MC_HPP
#define CVQKD_MC_HPP

#include "protocol.hpp"
#include "purify.hpp"
#include "rng.hpp"

// Seeded Monte-Carlo simulation of the prepare-measure-transmit pipeline:
// per-sample draws of Alice's modulation x_M, her homodyne outcome x_HD and
// Bob's outcome x_B, with second moments exactly matching the analytic model.

namespace cvqkd {

struct RunConfig {
  ProtocolParams protocol;
  ChannelParams channel;
  DetectorParams detector;
  std::size_t n_samples = 200000;
  std::uint64_t seed = 0;
  bool interleave_bases = false;  // default: all-x block, then all-p block

  void validate() const {
    protocol.validate();
    channel.validate();
    detector.validate();
    if (n_samples < 2) throw std::invalid_argument("RunConfig: n_samples >= 2 required");
  }
};

struct Sample {
  int basis;  // 0 = x, 1 = p
  double x_m, x_hd, x_b;
};

struct SampleBlock {
  std::vector<Sample> samples;
};

// Joint covariance of (x_M, x_HD, x_B) in one basis. Alice's homodyne arm
// and her modulation are independent; Bob sees both through the channel and
// his detector. In the p basis the correlations flip sign (sigma_z pattern;
// Alice's p record is kept with the same sign convention as the analytic
// C_AB^p = -(g C0 + delta_v)).
inline Mat sample_covariance_model(const RunConfig& cfg, int basis) {
  const ProtocolParams& p = cfg.protocol;
  const double v = source_epr_variance(p);
  const double c0 = source_epr_correlation(p);
  const double sgn = (basis == 0) ? 1.0 : -1.0;
  const double eta_total = cfg.channel.eta * cfg.detector.efficiency;
  const double vb = cfg.detector.efficiency *
                        (cfg.channel.eta * (v + p.delta_v + cfg.channel.epsilon) + 1.0 -
                         cfg.channel.eta) +
                    (1.0 - cfg.detector.efficiency) + cfg.detector.electronic_noise +
                    cfg.detector.trusted_added_noise;
  Mat m(3, 3);
  m(0, 0) = p.delta_v;
  m(1, 1) = v;
  m(2, 2) = vb;
  m(0, 2) = m(2, 0) = sgn * std::sqrt(eta_total) * p.delta_v;
  m(1, 2) = m(2, 1) = sgn * std::sqrt(eta_total) * c0;
  return m;
}

// Cholesky factor that tolerates a zero first row/column (delta_v = 0).
inline Mat sample_chol(const Mat& m) {
  Mat a = m;
  bool zero_mod = !(a(0, 0) > 0.0);
  if (zero_mod) a(0, 0) = 1.0;  // dummy; the draw is multiplied by 0 below
  Mat l = cholesky(a);
  if (zero_mod)
    for (int i = 0; i < 3; ++i) l(i, 0) = 0.0;
  return l;
}

inline SampleBlock simulate_run(const RunConfig& cfg) {
  cfg.validate();
  const Mat lx = sample_chol(sample_covariance_model(cfg, 0));
  const Mat lp = sample_chol(sample_covariance_model(cfg, 1));
  CounterRng rng(cfg.seed);
  SampleBlock block;
  block.samples.resize(cfg.n_samples);
  const std::size_t n_x = (cfg.n_samples + 1) / 2;
  for (std::size_t i = 0; i < cfg.n_samples; ++i) {
    const int basis = cfg.interleave_bases ? static_cast<int>(i % 2) : (i < n_x ? 0 : 1);
    const Mat& l = (basis == 0) ? lx : lp;
    const double z0 = rng.normal(), z1 = rng.normal(), z2 = rng.normal();
    Sample& s = block.samples[i];
    s.basis = basis;
    s.x_m = l(0, 0) * z0;
    s.x_hd = l(1, 0) * z0 + l(1, 1) * z1;
    s.x_b = l(2, 0) * z0 + l(2, 1) * z1 + l(2, 2) * z2;
  }
  return block;
}

// Alice's optimized data variable x_A = x_M + g * x_HD, per sample.
inline std::vector<double> weighted_alice(const SampleBlock& block, double g) {
  std::vector<double> out(block.samples.size());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = block.samples[i].x_m + g * block.samples[i].x_hd;
  return out;
}

struct CovarianceEstimate {
  MeasuredTwoModeMatrix matrix;
  MeasuredTwoModeMatrix standard_error;
  std::size_t n_x = 0, n_p = 0;
};

namespace detail {

struct BasisStats {
  double v_a, v_b, c;
  double se_va, se_vb, se_c;
  std::size_t n;
};

inline BasisStats basis_stats(const SampleBlock& block, double g, int basis) {
  double sa = 0, sb = 0;
  std::size_t n = 0;
  for (const Sample& s : block.samples)
    if (s.basis == basis) {
      sa += s.x_m + g * s.x_hd;
      sb += s.x_b;
      ++n;
    }
  if (n < 100) throw numerical_error("estimate_covariance: fewer than 100 samples in a basis");
  const double ma = sa / n, mb = sb / n;
  double vaa = 0, vbb = 0, vab = 0;
  for (const Sample& s : block.samples)
    if (s.basis == basis) {
      const double da = s.x_m + g * s.x_hd - ma, db = s.x_b - mb;
      vaa += da * da;
      vbb += db * db;
      vab += da * db;
    }
  BasisStats st;
  st.n = n;
  st.v_a = vaa / (n - 1);
  st.v_b = vbb / (n - 1);
  st.c = vab / (n - 1);
  st.se_va = st.v_a * std::sqrt(2.0 / (n - 1));
  st.se_vb = st.v_b * std::sqrt(2.0 / (n - 1));
  st.se_c = std::sqrt((st.v_a * st.v_b + st.c * st.c) / (n - 1));  // delta method, Gaussian
  return st;
}

}  // namespace detail

inline CovarianceEstimate estimate_covariance(const SampleBlock& block, double g) {
  const detail::BasisStats x = detail::basis_stats(block, g, 0);
  const detail::BasisStats p = detail::basis_stats(block, g, 1);
  CovarianceEstimate e;
  e.matrix = {x.v_a, p.v_a, x.v_b, p.v_b, x.c, p.c};
  e.standard_error = {x.se_va, p.se_va, x.se_vb, p.se_vb, x.se_c, p.se_c};
  e.n_x = x.n;
  e.n_p = p.n;
  return e;
}

// Plot-ready scatter data: normalized (x_A, x_B) pairs of the x basis plus
// the 2-standard-deviation covariance ellipse and the shot-noise circle.
struct ScatterExport {
  std::vector<std::pair<double, double>> points;  // (x_A, x_B), normalized
  double ellipse_major = 0.0;                     // 2-sigma semi-axes
  double ellipse_minor = 0.0;
  double ellipse_angle_rad = 0.0;
  double shot_noise_radius = 0.0;  // 2-sigma vacuum circle, same normalization
};

inline ScatterExport scatter_export(const SampleBlock& block, double g, double normalization = 1.0) {
  if (!(normalization > 0.0)) throw std::invalid_argument("scatter_export: normalization > 0");
  ScatterExport out;
  double saa = 0, sbb = 0, sab = 0, sa = 0, sb = 0;
  std::size_t n = 0;
  for (const Sample& s : block.samples)
    if (s.basis == 0) {
      const double xa = (s.x_m + g * s.x_hd) / normalization, xb = s.x_b / normalization;
      out.points.emplace_back(xa, xb);
      sa += xa;
      sb += xb;
      saa += xa * xa;
      sbb += xb * xb;
      sab += xa * xb;
      ++n;
    }
  if (n < 2) throw numerical_error("scatter_export: not enough x-basis samples");
  const double va = saa / n - (sa / n) * (sa / n);
  const double vb = sbb / n - (sb / n) * (sb / n);
  const double cab = sab / n - (sa / n) * (sb / n);
  // eigendecomposition of the 2x2 sample covariance
  const double tr = va + vb, det = va * vb - cab * cab;
  const double disc = std::sqrt(std::max(tr * tr / 4.0 - det, 0.0));
  const double l1 = tr / 2.0 + disc, l2 = std::max(tr / 2.0 - disc, 0.0);
  out.ellipse_major = 2.0 * std::sqrt(l1);
  out.ellipse_minor = 2.0 * std::sqrt(l2);
  out.ellipse_angle_rad = 0.5 * std::atan2(2.0 * cab, va - vb);
  out.shot_noise_radius = 2.0 / normalization;
  return out;
}

}  // namespace cvqkd

#endif  // CVQKD_MC_HPP
