#ifndef CVQKD_PURIFY_HPP
#define CVQKD_PURIFY_HPP

#include <array>

#include "protocol.hpp"

// Pure global extensions of two-mode states: the general 4-mode construction
// (two EPR sources + two squeezers inside a Mach-Zehnder) with its
// six-parameter solve, and the analytic multimode purification of the
// protocol model itself.

namespace cvqkd {

struct PurificationParams {
  double r1 = 0.0, r2 = 0.0;  // squeezer parameters
  double v1 = 1.0, v2 = 1.0;  // EPR source variances (>= 1)
  double t1 = 0.5, t2 = 0.5;  // beamsplitter transmittances
};

// The six independent entries of a measured two-mode matrix (x-p cross terms
// assumed zero), SNU.
struct MeasuredTwoModeMatrix {
  double v_a_x = 1.0, v_a_p = 1.0;
  double v_b_x = 1.0, v_b_p = 1.0;
  double c_x = 0.0, c_p = 0.0;

  Mat to_matrix() const {
    Mat g(4, 4);
    g(0, 0) = v_a_x;
    g(1, 1) = v_a_p;
    g(2, 2) = v_b_x;
    g(3, 3) = v_b_p;
    g(0, 2) = g(2, 0) = c_x;
    g(1, 3) = g(3, 1) = c_p;
    return g;
  }

  static MeasuredTwoModeMatrix from_matrix(const Mat& g, double cross_tol = 1e-6) {
    if (g.rows() != 4 || g.cols() != 4)
      throw std::invalid_argument("MeasuredTwoModeMatrix: 4x4 matrix expected");
    static const int zeros[][2] = {{0, 1}, {0, 3}, {1, 2}, {2, 3}};
    for (auto& z : zeros)
      if (std::abs(g(z[0], z[1])) > cross_tol || std::abs(g(z[1], z[0])) > cross_tol)
        throw unphysical_error("MeasuredTwoModeMatrix: x-p cross terms exceed tolerance");
    return {g(0, 0), g(1, 1), g(2, 2), g(3, 3), 0.5 * (g(0, 2) + g(2, 0)),
            0.5 * (g(1, 3) + g(3, 1))};
  }

  std::array<double, 6> elements() const { return {v_a_x, v_a_p, v_b_x, v_b_p, c_x, c_p}; }
};

namespace detail {

inline Mat four_mode_build(const PurificationParams& p) {
  Mat g = Mat::identity(8);
  put_epr(g, 0, 2, p.v1);
  put_epr(g, 1, 3, p.v2);
  const Mat s = beamsplitter(p.t2, 0, 1, 4) * squeezer(-p.r1, 0, 4) * squeezer(-p.r2, 1, 4) *
                beamsplitter(p.t1, 0, 1, 4);
  return apply_symplectic(g, s);
}

// Closed-form AB elements of the 4-mode state, used as an internal
// cross-check on the constructive build.
inline std::array<double, 6> four_mode_ab_closed_form(const PurificationParams& p) {
  const double s1 = std::exp(p.r1), s2 = std::exp(p.r2);
  const double t1 = std::sqrt(p.t1 * (1.0 - p.t1)), t2 = std::sqrt(p.t2 * (1.0 - p.t2));
  const double a = (p.v1 - p.v2) / (s1 * s2);
  const double b = (p.v1 - p.v2) * s1 * s2;
  const double d = p.t1 * (p.v1 - p.v2);
  const double vax = -2.0 * a * t1 * t2 + p.t2 * (p.v2 + d) / (s1 * s1) +
                     (1.0 - p.t2) * (p.v1 - d) / (s2 * s2);
  const double vbx = 2.0 * a * t1 * t2 + p.t2 * (p.v1 - d) / (s2 * s2) +
                     (1.0 - p.t2) * (p.v2 + d) / (s1 * s1);
  const double vap = -2.0 * b * t1 * t2 + p.t2 * s1 * s1 * (p.v2 + d) +
                     (1.0 - p.t2) * s2 * s2 * (p.v1 - d);
  const double vbp = 2.0 * b * t1 * t2 + p.t2 * s2 * s2 * (p.v1 - d) +
                     (1.0 - p.t2) * s1 * s1 * (p.v2 + d);
  const double cx =
      a * t1 * (1.0 - 2.0 * p.t2) + t2 * ((p.v1 - d) / (s2 * s2) - (p.v2 + d) / (s1 * s1));
  const double cp =
      b * t1 * (1.0 - 2.0 * p.t2) + t2 * (s2 * s2 * (p.v1 - d) - s1 * s1 * (p.v2 + d));
  return {vax, vap, vbx, vbp, cx, cp};
}

inline std::array<double, 6> ab_elements_of(const Mat& g) {
  return {g(0, 0), g(1, 1), g(2, 2), g(3, 3), g(0, 2), g(1, 3)};
}

}  // namespace detail

// Pure 4-mode state (modes A, B, C, D) from the six purification parameters.
// Built constructively and verified against the closed-form AB elements.
inline Mat four_mode_matrix(const PurificationParams& p) {
  if (p.v1 < 1.0 || p.v2 < 1.0)
    throw unphysical_error("four_mode_matrix: EPR variances must be >= 1");
  if (p.t1 < 0.0 || p.t1 > 1.0 || p.t2 < 0.0 || p.t2 > 1.0)
    throw unphysical_error("four_mode_matrix: transmittances must be in [0,1]");
  const Mat g = detail::four_mode_build(p);
  const auto got = detail::ab_elements_of(g);
  const auto want = detail::four_mode_ab_closed_form(p);
  for (int i = 0; i < 6; ++i)
    if (std::abs(got[i] - want[i]) > 1e-8 * std::max(1.0, std::abs(want[i])))
      throw numerical_error("four_mode_matrix: constructive build disagrees with closed form");
  return g;
}

struct PurificationSolve {
  PurificationParams params;
  double residual = 0.0;  // max-abs AB element mismatch, SNU
  int start_index = -1;
  int iterations = 0;
};

namespace detail {

inline PurificationParams solve_to_params(const std::array<double, 6>& z) {
  const auto clamp = [](double v, double lim) { return std::max(-lim, std::min(lim, v)); };
  PurificationParams p;
  p.r1 = clamp(z[0], 20.0);
  p.r2 = clamp(z[1], 20.0);
  p.v1 = 1.0 + std::exp(clamp(z[2], 40.0));
  p.v2 = 1.0 + std::exp(clamp(z[3], 40.0));
  p.t1 = 1.0 / (1.0 + std::exp(-clamp(z[4], 40.0)));
  p.t2 = 1.0 / (1.0 + std::exp(-clamp(z[5], 40.0)));
  return p;
}

inline std::array<double, 6> solve_residual(const std::array<double, 6>& z,
                                            const std::array<double, 6>& target) {
  const auto got = ab_elements_of(four_mode_build(solve_to_params(z)));
  std::array<double, 6> f;
  for (int i = 0; i < 6; ++i) f[i] = got[i] - target[i];
  return f;
}

inline double inf_norm(const std::array<double, 6>& f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace detail

// Finds purification parameters whose 4-mode AB submatrix reproduces the
// measured matrix. Damped Newton on the 6 residuals with a fixed
// low-discrepancy multi-start schedule (deterministic: identical input gives
// identical output). Parameters are solved in unconstrained coordinates
// (r free, V = 1 + e^u, T = logistic(w)); non-uniqueness of the parameters
// is accepted, only the submatrix match is contractual.
inline PurificationSolve solve_purification(const MeasuredTwoModeMatrix& m, int n_starts = 32,
                                            double accept = 1e-6) {
  if (!is_physical(m.to_matrix()))
    throw unphysical_error("solve_purification: measured matrix is unphysical");
  const std::array<double, 6> target = m.elements();
  // golden-ratio-style low-discrepancy start sequence
  static const double phis[6] = {0.6180339887, 0.7548776662, 0.8191725134,
                                 0.2207440846, 0.3569058261, 0.4655712319};
  PurificationSolve best;
  double best_rn = 1e300;
  int total_iter = 0;
  for (int k = 0; k < n_starts && best_rn > 1e-10; ++k) {
    double frac[6];
    for (int j = 0; j < 6; ++j) frac[j] = std::fmod(0.5 + phis[j] * (k + 1), 1.0);
    const double r0a = -3.0 + 6.0 * frac[0], r0b = -3.0 + 6.0 * frac[1];
    const double v0a = 1.0 + 49.0 * frac[2], v0b = 1.0 + 49.0 * frac[3];
    const double t0a = 0.01 + 0.98 * frac[4], t0b = 0.01 + 0.98 * frac[5];
    std::array<double, 6> z = {r0a,
                               r0b,
                               std::log(v0a - 1.0 + 1e-9),
                               std::log(v0b - 1.0 + 1e-9),
                               std::log(t0a / (1.0 - t0a)),
                               std::log(t0b / (1.0 - t0b))};
    auto f = detail::solve_residual(z, target);
    double rn = detail::inf_norm(f);
    int iters = 0;
    for (int it = 0; it < 120 && rn >= 1e-10; ++it, ++iters) {
      Mat jac(6, 6);
      for (int j = 0; j < 6; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(z[j]));
        auto zp = z;
        zp[j] += h;
        const auto fp = detail::solve_residual(zp, target);
        for (int i = 0; i < 6; ++i) jac(i, j) = (fp[i] - f[i]) / h;
      }
      std::vector<double> rhs(6);
      for (int i = 0; i < 6; ++i) rhs[i] = -f[i];
      std::vector<double> dz;
      try {
        dz = solve_linear(jac, rhs);
      } catch (const numerical_error&) {
        break;  // singular Jacobian at this start; move on
      }
      double lam = 1.0;
      bool improved = false;
      for (int h = 0; h < 40; ++h, lam *= 0.5) {
        auto z2 = z;
        for (int i = 0; i < 6; ++i) z2[i] += lam * dz[i];
        const auto f2 = detail::solve_residual(z2, target);
        const double rn2 = detail::inf_norm(f2);
        if (rn2 < rn) {
          z = z2;
          f = f2;
          rn = rn2;
          improved = true;
          break;
        }
      }
      if (!improved) break;
    }
    total_iter += iters;
    if (rn < best_rn) {
      best_rn = rn;
      best.params = detail::solve_to_params(z);
      best.start_index = k;
    }
  }
  best.residual = best_rn;
  best.iterations = total_iter;
  if (best_rn > accept)
    throw numerical_error("solve_purification: no start converged (best residual " +
                          std::to_string(best_rn) + ")");
  return best;
}

// Analytic purification of the protocol model, before the channel.
// Mode layout (8 modes, bob mode = 1):
//   0 = Alice's gain-weighted arm, 1 = Bob's mode,
//   2,3 = EPR partners purifying the impure squeezed sources,
//   4,5 = EPR pair feeding the x-modulation of A (4) and B (5),
//   6,7 = EPR pair feeding the p-modulation of A (6) and B (7).
// Modulation is injected through exact shear couplings with strength
// kappa = sqrt(delta_v / v_ancilla): adds exactly kappa^2 * v_ancilla noise
// while keeping the global state pure to ~1e-12 (a near-unity beamsplitter
// with a huge EPR variance would lose purity to double rounding, and the
// rounding loss grows linearly with v_ancilla, hence the moderate default).
// The A<->B modulation correlation is short of delta_v by
// delta_v/(2*v_ancilla^2) (relative shortfall <= 1/(2*v_ancilla^2)),
// irrelevant for the Holevo bound, which depends only on Bob's reduced state
// and global purity.
inline Mat theoretical_purification(const ProtocolParams& p, double v_ancilla = 100.0) {
  p.validate();
  const int n = 8;
  const double nu = std::sqrt(1.0 + p.v0 * p.delta_v0);
  Mat g = Mat::identity(2 * n);
  put_epr(g, 0, 2, nu);
  put_epr(g, 1, 3, nu);
  const double r = 0.5 * std::log(p.v0 / nu);
  const Mat s = beamsplitter(0.5, 0, 1, n) * squeezer(r, 0, n) * squeezer(-r, 1, n);
  g = apply_symplectic(g, s);
  if (p.g > 0.0) g = apply_symplectic(g, squeezer(std::log(p.g), 0, n));
  if (p.delta_v > 0.0) {
    const double kappa = std::sqrt(p.delta_v / v_ancilla);
    put_epr(g, 4, 5, v_ancilla);
    put_epr(g, 6, 7, v_ancilla);
    const Mat s2 = shear_p(kappa, 7, 1, n) * shear_p(kappa, 6, 0, n) * shear_x(kappa, 5, 1, n) *
                   shear_x(kappa, 4, 0, n);
    g = apply_symplectic(g, s2);
  }
  return g;
}

inline constexpr int theoretical_bob_mode = 1;

// Purified trusted detector on one mode: loss as a beamsplitter with a
// vacuum ancilla, electronic + added noise injected from two EPR ancilla
// pairs through shear couplings (kept in the trusted set). Bob's mode index
// is unchanged; up to 5 modes are appended.
inline Mat detection_purify(const Mat& g, int bob_mode, const DetectorParams& d,
                            double v_ancilla = 100.0) {
  d.validate();
  const int n = mode_count(g);
  check_mode_index(bob_mode, n, "detection_purify");
  const double noise = d.electronic_noise + d.trusted_added_noise;
  const int extra = (d.efficiency < 1.0 ? 1 : 0) + (noise > 0.0 ? 4 : 0);
  if (extra == 0) return g;
  const int n2 = n + extra;
  Mat g2 = Mat::identity(2 * n2);
  for (int i = 0; i < 2 * n; ++i)
    for (int j = 0; j < 2 * n; ++j) g2(i, j) = g(i, j);
  int idx = n;
  Mat s = Mat::identity(2 * n2);
  if (d.efficiency < 1.0) {
    s = beamsplitter(d.efficiency, bob_mode, idx, n2) * s;
    ++idx;
  }
  if (noise > 0.0) {
    put_epr(g2, idx, idx + 1, v_ancilla);
    put_epr(g2, idx + 2, idx + 3, v_ancilla);
    const double kappa = std::sqrt(noise / v_ancilla);
    s = shear_p(kappa, idx + 2, bob_mode, n2) * shear_x(kappa, idx, bob_mode, n2) * s;
  }
  return apply_symplectic(g2, s);
}

}  // namespace cvqkd

#endif  // CVQKD_PURIFY_HPP
