#ifndef CVQKD_TEST_HELPERS_HPP
#define CVQKD_TEST_HELPERS_HPP

// Shared test utilities: deterministic random-state generation and
// independently coded oracles that the library implementations are checked
// against. The oracles deliberately use different algorithms than the
// library (closed forms, dense Schur complements, Hermitian embeddings).

#include "cvqkd/rng.hpp"
#include "cvqkd/security.hpp"

namespace testutil {

using cvqkd::Mat;

// Random physical covariance matrix built constructively: thermal modes
// (nu in [1, nu_max]) passed through a few random squeezers and
// beamsplitters. Physical by construction.
inline Mat random_physical(cvqkd::CounterRng& rng, int n_modes, double nu_max = 5.0,
                           double r_max = 1.0) {
  Mat g = Mat::identity(2 * n_modes);
  for (int m = 0; m < n_modes; ++m) {
    const double nu = 1.0 + (nu_max - 1.0) * rng.uniform();
    g(2 * m, 2 * m) = nu;
    g(2 * m + 1, 2 * m + 1) = nu;
  }
  for (int round = 0; round < 2; ++round) {
    for (int m = 0; m < n_modes; ++m)
      g = cvqkd::apply_symplectic(g, cvqkd::squeezer(r_max * (2.0 * rng.uniform() - 1.0), m, n_modes));
    for (int m = 0; m + 1 < n_modes; ++m)
      g = cvqkd::apply_symplectic(
          g, cvqkd::beamsplitter(0.05 + 0.9 * rng.uniform(), m, m + 1, n_modes));
  }
  return g;
}

// Closed-form symplectic eigenvalues of a 2-mode covariance matrix:
// nu_pm^2 = (Delta -+ sqrt(Delta^2 - 4 det g)) / 2 with
// Delta = det A + det B + 2 det C (block decomposition).
inline std::pair<double, double> two_mode_eigs_closed_form(const Mat& g) {
  const double det_a = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
  const double det_b = g(2, 2) * g(3, 3) - g(2, 3) * g(3, 2);
  const double det_c = g(0, 2) * g(1, 3) - g(0, 3) * g(1, 2);
  // det of the full 4x4 via cofactor expansion
  double det = 0.0;
  {
    // simple LU-free 4x4 determinant
    const auto m = [&](int i, int j) { return g(i, j); };
    det = m(0, 0) * (m(1, 1) * (m(2, 2) * m(3, 3) - m(2, 3) * m(3, 2)) -
                     m(1, 2) * (m(2, 1) * m(3, 3) - m(2, 3) * m(3, 1)) +
                     m(1, 3) * (m(2, 1) * m(3, 2) - m(2, 2) * m(3, 1))) -
          m(0, 1) * (m(1, 0) * (m(2, 2) * m(3, 3) - m(2, 3) * m(3, 2)) -
                     m(1, 2) * (m(2, 0) * m(3, 3) - m(2, 3) * m(3, 0)) +
                     m(1, 3) * (m(2, 0) * m(3, 2) - m(2, 2) * m(3, 0))) +
          m(0, 2) * (m(1, 0) * (m(2, 1) * m(3, 3) - m(2, 3) * m(3, 1)) -
                     m(1, 1) * (m(2, 0) * m(3, 3) - m(2, 3) * m(3, 0)) +
                     m(1, 3) * (m(2, 0) * m(3, 1) - m(2, 1) * m(3, 0))) -
          m(0, 3) * (m(1, 0) * (m(2, 1) * m(3, 2) - m(2, 2) * m(3, 1)) -
                     m(1, 1) * (m(2, 0) * m(3, 2) - m(2, 2) * m(3, 0)) +
                     m(1, 2) * (m(2, 0) * m(3, 1) - m(2, 1) * m(3, 0)));
  }
  const double delta = det_a + det_b + 2.0 * det_c;
  const double disc = std::sqrt(std::max(delta * delta - 4.0 * det, 0.0));
  const double nu_plus = std::sqrt(0.5 * (delta + disc));
  const double nu_minus = std::sqrt(std::max(0.5 * (delta - disc), 0.0));
  return {nu_plus, nu_minus};
}

// Brute-force Gaussian conditioning oracle: explicit rank-1 Schur update on
// the dense matrix, indices handled without the library's helper.
inline Mat schur_condition_oracle(const Mat& g, int mode, int quad) {
  const int n2 = g.rows();
  const int mi = 2 * mode + quad;
  std::vector<int> keep;
  for (int i = 0; i < n2; ++i)
    if (i != 2 * mode && i != 2 * mode + 1) keep.push_back(i);
  Mat out(static_cast<int>(keep.size()), static_cast<int>(keep.size()));
  for (size_t a = 0; a < keep.size(); ++a)
    for (size_t b = 0; b < keep.size(); ++b)
      out(static_cast<int>(a), static_cast<int>(b)) =
          g(keep[a], keep[b]) - g(keep[a], mi) * (1.0 / g(mi, mi)) * g(mi, keep[b]);
  return out;
}

// Independent physicality oracle: gamma + i*Omega >= 0, checked through the
// real symmetric embedding [[gamma, -Omega], [Omega, gamma]] whose spectrum
// equals that of the Hermitian matrix (doubled).
inline double min_eig_gamma_plus_i_omega(const Mat& g) {
  const int n2 = g.rows();
  const Mat omega = cvqkd::symplectic_form(n2 / 2);
  Mat h(2 * n2, 2 * n2);
  for (int i = 0; i < n2; ++i)
    for (int j = 0; j < n2; ++j) {
      h(i, j) = g(i, j);
      h(n2 + i, n2 + j) = g(i, j);
      h(i, n2 + j) = -omega(i, j);
      h(n2 + i, j) = omega(i, j);
    }
  return cvqkd::jacobi_eigenvalues(h).front();
}

// Channel-dilation Holevo oracle: embed the lossy channel as a beamsplitter
// to an explicit environment (vacuum for eps = 0, an EPR-purified thermal
// state otherwise), give the environment to Eve, and compute
// chi = S(Eve) - S(Eve | x_B) from the environment side.
inline double holevo_dilation_oracle(const Mat& g_pure, int bob_mode, double eta, double eps,
                                     cvqkd::Quadrature quad) {
  const int n = cvqkd::mode_count(g_pure);
  const int n2 = n + 2;  // env mode + its EPR partner
  Mat g = Mat::identity(2 * n2);
  for (int i = 0; i < 2 * n; ++i)
    for (int j = 0; j < 2 * n; ++j) g(i, j) = g_pure(i, j);
  if (eps > 0.0) {
    if (!(eta < 1.0)) throw std::invalid_argument("dilation oracle: eps > 0 needs eta < 1");
    cvqkd::put_epr(g, n, n + 1, 1.0 + eta * eps / (1.0 - eta));
  }
  g = cvqkd::apply_symplectic(g, cvqkd::beamsplitter(eta, bob_mode, n, n2));
  const std::vector<int> eve = {n, n + 1};
  const double s_e = cvqkd::von_neumann_entropy(cvqkd::submatrix(g, eve));
  const Mat g_cond = cvqkd::condition_on_homodyne(g, bob_mode, quad);
  // bob mode removed: eve modes shift down by one
  const std::vector<int> eve_after = {n - 1, n};
  const double s_e_cond = cvqkd::von_neumann_entropy(cvqkd::submatrix(g_cond, eve_after));
  return s_e - s_e_cond;
}

// Classical Gaussian mutual information between two scalar variables.
inline double gaussian_mi_oracle(double va, double c, double vb) {
  return 0.5 * std::log2(va * vb / (va * vb - c * c));
}

}  // namespace testutil

#endif
