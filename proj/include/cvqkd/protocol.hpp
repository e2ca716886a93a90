#ifndef CVQKD_PROTOCOL_HPP
#define CVQKD_PROTOCOL_HPP

#include "states.hpp"

// Analytic prepare-and-measure model: Alice's gain-weighted data variable
// x_A = x_M + g*x_HD against Bob's homodyne outcome, the lossy/noisy channel,
// Bob's trusted detector, and the Shannon mutual information.

namespace cvqkd {

struct ProtocolParams {
  double v0 = 1.0;        // squeezed quadrature variance of each source (SNU)
  double delta_v0 = 0.0;  // excess antisqueezing noise (SNU)
  double delta_v = 0.0;   // coherent modulation variance (SNU)
  double g = 0.0;         // gain weight for Alice's homodyne data
  double g_max = 1.5;

  void validate() const {
    if (!(v0 > 0.0) || v0 > 1.0 + 1e-12)
      throw unphysical_error("ProtocolParams: V0 must be in (0, 1]");
    if (delta_v0 < 0.0) throw unphysical_error("ProtocolParams: delta_V0 must be >= 0");
    if (delta_v < 0.0) throw unphysical_error("ProtocolParams: delta_V must be >= 0");
    if (g < 0.0 || g > g_max) throw unphysical_error("ProtocolParams: g must be in [0, g_max]");
  }
};

struct ChannelParams {
  double eta = 1.0;      // transmittance
  double epsilon = 0.0;  // excess noise at the channel input (SNU)

  void validate() const {
    if (eta < 0.0 || eta > 1.0) throw unphysical_error("ChannelParams: eta must be in [0,1]");
    if (epsilon < 0.0) throw unphysical_error("ChannelParams: epsilon must be >= 0");
  }
};

struct DetectorParams {
  double efficiency = 1.0;
  double electronic_noise = 0.0;     // SNU
  double trusted_added_noise = 0.0;  // deliberately added noise on Bob's data (SNU)

  void validate() const {
    if (!(efficiency > 0.0) || efficiency > 1.0)
      throw unphysical_error("DetectorParams: efficiency must be in (0, 1]");
    if (electronic_noise < 0.0) throw unphysical_error("DetectorParams: electronic_noise must be >= 0");
    if (trusted_added_noise < 0.0)
      throw unphysical_error("DetectorParams: trusted_added_noise must be >= 0");
  }
};

// EPR variance of the (possibly impure) symmetrized source.
inline double source_epr_variance(const ProtocolParams& p) {
  return 0.5 * ((1.0 + p.v0 * p.v0) / p.v0 + p.delta_v0);
}

// Source correlation before gain weighting and modulation.
inline double source_epr_correlation(const ProtocolParams& p) {
  return 0.5 * ((1.0 - p.v0 * p.v0) / p.v0 + p.delta_v0);
}

struct AliceBobElements {
  double v_a;  // Var(x_A), both quadratures
  double c;    // |cov|; +c on x, -c on p
  double v_b;  // Var at Bob, both quadratures
};

inline AliceBobElements alice_bob_elements(const ProtocolParams& p) {
  p.validate();
  const double v = source_epr_variance(p);
  const double c0 = source_epr_correlation(p);
  return {p.g * p.g * v + p.delta_v, p.g * c0 + p.delta_v, v + p.delta_v};
}

// Effective two-mode matrix of Alice's weighted data variable vs Bob's mode,
// before the channel. Note this is a classical-equivalent description: for
// some valid parameter sets (small g, no modulation) it violates the
// uncertainty bound, because x_A is a processed classical record rather than
// a mode Alice holds. Callers that need a quantum state should go through the
// purifier instead; this constructor rejects unphysical results.
inline Mat alice_bob_covariance(const ProtocolParams& p) {
  const AliceBobElements e = alice_bob_elements(p);
  Mat g = Mat::identity(4);
  for (int q = 0; q < 2; ++q) {
    const double sign = (q == 0) ? 1.0 : -1.0;
    g(q, q) = e.v_a;
    g(2 + q, 2 + q) = e.v_b;
    g(q, 2 + q) = sign * e.c;
    g(2 + q, q) = sign * e.c;
  }
  if (!is_physical(g))
    throw unphysical_error(
        "alice_bob_covariance: effective matrix violates the uncertainty bound "
        "(min symplectic eigenvalue < 1); use the purifier for security analysis");
  return g;
}

// Optimal gain for a pure source: g = sqrt(V_EPR^2 - 1) / V_EPR.
inline double optimal_gain_pure(double v_epr) {
  if (v_epr < 1.0) throw unphysical_error("optimal_gain_pure: V_EPR must be >= 1");
  return std::sqrt(v_epr * v_epr - 1.0) / v_epr;
}

// Lossy channel with input-referred excess noise on one mode of an n-mode
// state: V -> eta*(V + eps) + 1 - eta, correlations scaled by sqrt(eta).
inline Mat apply_channel_mode(const Mat& g, int mode, const ChannelParams& c) {
  c.validate();
  const int n = mode_count(g);
  check_mode_index(mode, n, "apply_channel_mode");
  Mat out = g;
  const double k = std::sqrt(c.eta);
  const double add = c.eta * c.epsilon + 1.0 - c.eta;
  for (int q = 0; q < 2; ++q) {
    const int i = 2 * mode + q;
    for (int j = 0; j < 2 * n; ++j) {
      out(i, j) *= k;
      out(j, i) *= k;
    }
  }
  // the diagonal picked up k twice; correct it, then add the noise term
  for (int q = 0; q < 2; ++q) {
    const int i = 2 * mode + q;
    out(i, i) = c.eta * g(i, i) + add;
  }
  return out;
}

// Convenience for the 2-mode (A, B) matrix with B = mode 1.
inline Mat apply_channel(const Mat& g_ab, const ChannelParams& c) {
  if (mode_count(g_ab) != 2) throw std::invalid_argument("apply_channel: 2-mode matrix expected");
  return apply_channel_mode(g_ab, 1, c);
}

// Bob's trusted detector as a covariance map on his mode:
// V -> eff*V + (1 - eff) + electronic + added, correlations scaled by
// sqrt(eff). The purified version of the same map lives in purify.hpp.
inline Mat bob_detection_mode(const Mat& g, int mode, const DetectorParams& d) {
  d.validate();
  const int n = mode_count(g);
  check_mode_index(mode, n, "bob_detection_mode");
  Mat out = g;
  const double k = std::sqrt(d.efficiency);
  const double add = 1.0 - d.efficiency + d.electronic_noise + d.trusted_added_noise;
  for (int q = 0; q < 2; ++q) {
    const int i = 2 * mode + q;
    for (int j = 0; j < 2 * n; ++j) {
      out(i, j) *= k;
      out(j, i) *= k;
    }
  }
  for (int q = 0; q < 2; ++q) {
    const int i = 2 * mode + q;
    out(i, i) = d.efficiency * g(i, i) + add;
  }
  return out;
}

inline Mat bob_detection(const Mat& g_ab, const DetectorParams& d) {
  if (mode_count(g_ab) != 2) throw std::invalid_argument("bob_detection: 2-mode matrix expected");
  return bob_detection_mode(g_ab, 1, d);
}

inline double mutual_information_elements(double v_a, double c, double v_b) {
  if (!(v_a > 0.0) || !(v_b > 0.0))
    throw unphysical_error("mutual_information: non-positive variance");
  const double cond = v_b - c * c / v_a;
  if (!(cond > 0.0)) throw unphysical_error("mutual_information: conditional variance <= 0");
  return 0.5 * std::log2(v_b / cond);
}

inline double mutual_information_quad(const Mat& g_ab, Quadrature quad) {
  if (mode_count(g_ab) != 2) throw std::invalid_argument("mutual_information: 2-mode matrix expected");
  const int q = static_cast<int>(quad);
  return mutual_information_elements(g_ab(q, q), g_ab(q, 2 + q), g_ab(2 + q, 2 + q));
}

// Average of the x- and p-basis mutual informations (equal for the symmetric
// states this model produces; averaging covers estimated matrices).
inline double mutual_information(const Mat& g_ab) {
  return 0.5 * (mutual_information_quad(g_ab, Quadrature::x) +
                mutual_information_quad(g_ab, Quadrature::p));
}

inline double distance_to_transmittance(double km, double db_per_km = 0.2) {
  if (km < 0.0) throw std::invalid_argument("distance_to_transmittance: km must be >= 0");
  return std::pow(10.0, -db_per_km * km / 10.0);
}

inline double loss_db_to_transmittance(double db) {
  return std::pow(10.0, -db / 10.0);
}

}  // namespace cvqkd

#endif  // CVQKD_PROTOCOL_HPP
