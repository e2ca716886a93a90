#ifndef CVQKD_SECURITY_HPP
#define CVQKD_SECURITY_HPP

#include "purify.hpp"

// Entropy and key-rate engine: G function, von Neumann entropy from
// symplectic spectra, Holevo bound via explicit purification, key rate.

namespace cvqkd {

inline double g_function(double x) {
  if (x < -1e-12) throw unphysical_error("g_function: negative argument");
  if (x <= 0.0) return 0.0;
  return (x + 1.0) * std::log2(x + 1.0) - x * std::log2(x);
}

inline double von_neumann_entropy(const Mat& g) {
  double total = 0.0;
  for (double nu : symplectic_eigenvalues(g)) {
    if (nu < 1.0 - 1e-9) throw unphysical_error("von_neumann_entropy: unphysical state (nu < 1)");
    if (nu < 1.0) nu = 1.0;  // clamp numerical noise on pure modes
    total += g_function(0.5 * (nu - 1.0));
  }
  return total;
}

// chi_BE = S(trusted state) - S(trusted state | Bob's homodyne outcome).
// The input is the trusted multimode state after the channel; Eve holds the
// purifying environment, so S(Eve) equals S(trusted) provided the pre-channel
// construction was pure (checked by the callers that build it).
inline double holevo_bound(const Mat& g_trusted, int bob_mode, Quadrature quad) {
  return von_neumann_entropy(g_trusted) -
         von_neumann_entropy(condition_on_homodyne(g_trusted, bob_mode, quad));
}

struct SecurityReport {
  double i_ab = 0.0;
  double chi_be = 0.0;
  double key_rate = 0.0;          // i_ab - chi_be, sign preserved
  double key_rate_clamped = 0.0;  // max(key_rate, 0)
  Quadrature basis = Quadrature::x;
  ProtocolParams protocol;
  ChannelParams channel;
  DetectorParams detector;
  double purity_deviation = 0.0;        // max |nu - 1| of the pre-channel purification
  double purification_residual = 0.0;   // solver residual (ingested-matrix path only)
  std::string source = "analytic";      // "analytic" or covariance input label
};

namespace detail {

inline double check_purity(const Mat& g_pure) {
  double dev = 0.0;
  for (double nu : symplectic_eigenvalues(g_pure)) dev = std::max(dev, std::abs(nu - 1.0));
  if (dev > 1e-6)
    throw numerical_error("purification is not pure enough (max |nu-1| = " + std::to_string(dev) +
                          ")");
  return dev;
}

}  // namespace detail

// Holevo bound of the protocol, via the theoretical purification:
// purify source+modulation, send Bob's mode through the channel, embed the
// trusted detector, condition on Bob's homodyne. Independent of the gain g
// (a local operation on Alice's trusted arm), which optimizers exploit.
inline double chi_be(const ProtocolParams& p, const ChannelParams& c, const DetectorParams& d,
                     Quadrature quad = Quadrature::x, double* purity_dev = nullptr) {
  c.validate();
  d.validate();
  const Mat g_pure = theoretical_purification(p);
  const double dev = detail::check_purity(g_pure);
  if (purity_dev) *purity_dev = dev;
  const Mat g_ch = apply_channel_mode(g_pure, theoretical_bob_mode, c);
  const Mat g_det = detection_purify(g_ch, theoretical_bob_mode, d);
  return holevo_bound(g_det, theoretical_bob_mode, quad);
}

// Mutual information of the analytic model after channel and detector; equal
// in both bases by construction.
inline double i_ab_analytic(const ProtocolParams& p, const ChannelParams& c,
                            const DetectorParams& d) {
  const AliceBobElements e = alice_bob_elements(p);
  const double v_b1 = c.eta * (e.v_b + c.epsilon) + 1.0 - c.eta;
  const double c1 = std::sqrt(c.eta) * e.c;
  const double v_b2 = d.efficiency * v_b1 + (1.0 - d.efficiency) + d.electronic_noise +
                      d.trusted_added_noise;
  const double c2 = std::sqrt(d.efficiency) * c1;
  if (e.v_a <= 0.0) return 0.0;  // no Alice data variance: zero information
  return mutual_information_elements(e.v_a, c2, v_b2);
}

inline SecurityReport key_rate(const ProtocolParams& p, const ChannelParams& c,
                               const DetectorParams& d) {
  p.validate();
  c.validate();
  d.validate();
  SecurityReport r;
  r.protocol = p;
  r.channel = c;
  r.detector = d;
  r.i_ab = i_ab_analytic(p, c, d);
  r.chi_be = chi_be(p, c, d, Quadrature::x, &r.purity_deviation);
  r.key_rate = r.i_ab - r.chi_be;
  r.key_rate_clamped = std::max(r.key_rate, 0.0);
  return r;
}

// Key rate from a covariance matrix measured at Bob's detector output.
// The trusted detector and the channel are peeled off to recover the
// pre-channel state, which is purified with the 4-mode solver; channel and
// detector are then re-applied on the purified state for the Holevo bound.
// I_AB comes from the measured matrix directly (x/p averaged).
inline SecurityReport key_rate_from_covariance(const MeasuredTwoModeMatrix& m,
                                               const ChannelParams& c, const DetectorParams& d,
                                               const std::string& label = "covariance") {
  c.validate();
  d.validate();
  if (!(c.eta > 0.0)) throw unphysical_error("key_rate_from_covariance: eta must be positive");
  SecurityReport r;
  r.channel = c;
  r.detector = d;
  r.source = label;
  r.i_ab = mutual_information(m.to_matrix());

  const double det_add = 1.0 - d.efficiency + d.electronic_noise + d.trusted_added_noise;
  const auto unwind_v = [&](double v_meas) {
    return ((v_meas - det_add) / d.efficiency - (1.0 - c.eta)) / c.eta - c.epsilon;
  };
  const double scale = std::sqrt(c.eta * d.efficiency);
  MeasuredTwoModeMatrix pre = m;
  pre.v_b_x = unwind_v(m.v_b_x);
  pre.v_b_p = unwind_v(m.v_b_p);
  pre.c_x = m.c_x / scale;
  pre.c_p = m.c_p / scale;
  if (!is_physical(pre.to_matrix()))
    throw unphysical_error(
        "key_rate_from_covariance: de-embedded pre-channel matrix is unphysical; check the "
        "assumed channel/detector parameters");

  const PurificationSolve sol = solve_purification(pre);
  r.purification_residual = sol.residual;
  const Mat g_pure = four_mode_matrix(sol.params);
  r.purity_deviation = detail::check_purity(g_pure);
  const Mat g_ch = apply_channel_mode(g_pure, 1, c);
  const Mat g_det = detection_purify(g_ch, 1, d);
  r.chi_be = 0.5 * (holevo_bound(g_det, 1, Quadrature::x) + holevo_bound(g_det, 1, Quadrature::p));
  r.key_rate = r.i_ab - r.chi_be;
  r.key_rate_clamped = std::max(r.key_rate, 0.0);
  return r;
}

}  // namespace cvqkd

#endif  // CVQKD_SECURITY_HPP
