#ifndef CVQKD_SYMPLECTIC_HPP
#define CVQKD_SYMPLECTIC_HPP

#include <algorithm>
#include <vector>

#include "mat.hpp"

// Gaussian-state linear algebra. Covariance matrices are 2N x 2N, in
// shot-noise units (vacuum variance = 1), quadratures interleaved as
// (x1, p1, x2, p2, ...).

namespace cvqkd {

using CovarianceMatrix = Mat;
using SymplecticTransform = Mat;

inline Mat symplectic_form(int n_modes) {
  if (n_modes < 1) throw std::invalid_argument("symplectic_form: n_modes >= 1 required");
  Mat o(2 * n_modes, 2 * n_modes);
  for (int k = 0; k < n_modes; ++k) {
    o(2 * k, 2 * k + 1) = 1.0;
    o(2 * k + 1, 2 * k) = -1.0;
  }
  return o;
}

inline int mode_count(const Mat& g) {
  if (g.rows() != g.cols() || g.rows() % 2 != 0 || g.rows() == 0)
    throw std::invalid_argument("covariance matrix must be 2N x 2N");
  return g.rows() / 2;
}

// Symplectic eigenvalues, descending. Uses gamma = L L^T and the singular
// values of K = L^T Omega L: K is antisymmetric and similar to Omega*gamma,
// so its singular values are the nu_k, each twice. The one-sided Jacobi SVD
// keeps high relative accuracy for nu near 1 even when entries are ~1e3,
// which a direct eigensolve of Omega*gamma would lose.
inline std::vector<double> symplectic_eigenvalues(const Mat& g) {
  const int n = mode_count(g);
  if (!g.is_symmetric(1e-8)) throw std::invalid_argument("symplectic_eigenvalues: matrix not symmetric");
  const Mat l = cholesky(g);  // throws unphysical_error if not PD
  const Mat k = l.transposed() * symplectic_form(n) * l;
  const std::vector<double> sv = singular_values(k);
  std::vector<double> nu(n);
  for (int i = 0; i < n; ++i) nu[i] = 0.5 * (sv[2 * i] + sv[2 * i + 1]);
  return nu;
}

inline double min_symplectic_eigenvalue(const Mat& g) {
  return symplectic_eigenvalues(g).back();
}

inline bool is_physical(const Mat& g) {
  if (g.rows() != g.cols() || g.rows() % 2 != 0) return false;
  if (!g.is_symmetric(1e-8)) return false;
  for (int i = 0; i < g.rows(); ++i)
    if (!(g(i, i) > 0.0)) return false;
  try {
    return min_symplectic_eigenvalue(g) >= 1.0 - 1e-9;
  } catch (const unphysical_error&) {
    return false;
  }
}

inline void check_mode_index(int m, int n_modes, const char* who) {
  if (m < 0 || m >= n_modes) throw std::invalid_argument(std::string(who) + ": mode index out of range");
}

// Two-mode mixing with amplitudes sqrt(T), sqrt(1-T) on both quadratures:
// q_a' = sqrt(T) q_a + sqrt(1-T) q_b ; q_b' = -sqrt(1-T) q_a + sqrt(T) q_b.
inline Mat beamsplitter(double t, int mode_a, int mode_b, int n_modes) {
  check_mode_index(mode_a, n_modes, "beamsplitter");
  check_mode_index(mode_b, n_modes, "beamsplitter");
  if (mode_a == mode_b) throw std::invalid_argument("beamsplitter: modes must differ");
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("beamsplitter: T must be in [0,1]");
  Mat s = Mat::identity(2 * n_modes);
  const double c = std::sqrt(t), r = std::sqrt(1.0 - t);
  for (int q = 0; q < 2; ++q) {
    const int i = 2 * mode_a + q, j = 2 * mode_b + q;
    s(i, i) = c;
    s(i, j) = r;
    s(j, i) = -r;
    s(j, j) = c;
  }
  return s;
}

// diag(e^r, e^-r) on the target mode's (x, p).
inline Mat squeezer(double r, int mode, int n_modes) {
  check_mode_index(mode, n_modes, "squeezer");
  Mat s = Mat::identity(2 * n_modes);
  s(2 * mode, 2 * mode) = std::exp(r);
  s(2 * mode + 1, 2 * mode + 1) = std::exp(-r);
  return s;
}

// QND-style coupling x_dst += k*x_src with back-action p_src -= k*p_dst.
// Exactly symplectic for any k; used to add noise from an ancilla arm
// without a near-unity beamsplitter limit.
inline Mat shear_x(double k, int src, int dst, int n_modes) {
  check_mode_index(src, n_modes, "shear_x");
  check_mode_index(dst, n_modes, "shear_x");
  if (src == dst) throw std::invalid_argument("shear_x: modes must differ");
  Mat s = Mat::identity(2 * n_modes);
  s(2 * dst, 2 * src) = k;
  s(2 * src + 1, 2 * dst + 1) = -k;
  return s;
}

// Conjugate coupling: p_dst += k*p_src, x_src -= k*x_dst.
inline Mat shear_p(double k, int src, int dst, int n_modes) {
  check_mode_index(src, n_modes, "shear_p");
  check_mode_index(dst, n_modes, "shear_p");
  if (src == dst) throw std::invalid_argument("shear_p: modes must differ");
  Mat s = Mat::identity(2 * n_modes);
  s(2 * dst + 1, 2 * src + 1) = k;
  s(2 * src, 2 * dst) = -k;
  return s;
}

inline Mat apply_symplectic(const Mat& g, const Mat& s) {
  if (s.rows() != g.rows() || s.cols() != g.cols())
    throw std::invalid_argument("apply_symplectic: dimension mismatch");
  Mat out = s * g * s.transposed();
  out.symmetrize();
  return out;
}

inline Mat submatrix(const Mat& g, const std::vector<int>& modes) {
  const int n = mode_count(g);
  for (int m : modes) check_mode_index(m, n, "submatrix");
  Mat out(2 * static_cast<int>(modes.size()), 2 * static_cast<int>(modes.size()));
  for (size_t a = 0; a < modes.size(); ++a)
    for (size_t b = 0; b < modes.size(); ++b)
      for (int qa = 0; qa < 2; ++qa)
        for (int qb = 0; qb < 2; ++qb)
          out(2 * static_cast<int>(a) + qa, 2 * static_cast<int>(b) + qb) =
              g(2 * modes[a] + qa, 2 * modes[b] + qb);
  return out;
}

enum class Quadrature { x = 0, p = 1 };

// Gaussian conditioning on a homodyne outcome of one quadrature of one mode:
// gamma_rest - sigma (X gamma_m X)^MP sigma^T, with the Moore-Penrose inverse
// of the rank-1 projected block taken in closed form as 1/variance in the
// measured slot. Returns the covariance of the remaining modes.
inline Mat condition_on_homodyne(const Mat& g, int measured_mode, Quadrature quad) {
  const int n = mode_count(g);
  check_mode_index(measured_mode, n, "condition_on_homodyne");
  const int mi = 2 * measured_mode + static_cast<int>(quad);
  const double v = g(mi, mi);
  if (!(v > 0.0)) throw unphysical_error("condition_on_homodyne: measured variance not positive");
  std::vector<int> keep;
  for (int i = 0; i < 2 * n; ++i)
    if (i / 2 != measured_mode) keep.push_back(i);
  Mat out(2 * (n - 1), 2 * (n - 1));
  for (size_t a = 0; a < keep.size(); ++a)
    for (size_t b = 0; b < keep.size(); ++b)
      out(static_cast<int>(a), static_cast<int>(b)) =
          g(keep[a], keep[b]) - g(keep[a], mi) * g(mi, keep[b]) / v;
  out.symmetrize();
  return out;
}

}  // namespace cvqkd

#endif  // CVQKD_SYMPLECTIC_HPP
