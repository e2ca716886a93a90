#include <doctest.h>

#include "test_helpers.hpp"

using namespace cvqkd;

TEST_CASE("alice_bob_elements / alice_bob_covariance") {
  // coherent-state model: squeezing terms vanish
  const AliceBobElements coh = alice_bob_elements({1.0, 0.0, 3.0, 0.0});
  CHECK(coh.v_a == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(coh.c == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(coh.v_b == doctest::Approx(4.0).epsilon(1e-14));

  const AliceBobElements e1 = alice_bob_elements({0.5, 0.0, 0.0, 1.0});
  CHECK(e1.v_a == doctest::Approx(1.25).epsilon(1e-14));
  CHECK(e1.c == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(e1.v_b == doctest::Approx(1.25).epsilon(1e-14));

  const AliceBobElements e2 = alice_bob_elements({0.5, 0.0, 0.0, 0.6});
  CHECK(e2.c == doctest::Approx(0.45).epsilon(1e-14));

  const Mat g = alice_bob_covariance({1.0, 0.0, 3.0, 0.0});
  CHECK(g(0, 2) == doctest::Approx(3.0));
  CHECK(g(1, 3) == doctest::Approx(-3.0));
  CHECK(is_physical(g));

  CHECK_THROWS_AS(alice_bob_elements({0.5, 0.0, 0.0, 2.0}), unphysical_error);  // g > g_max
  CHECK_THROWS_AS(alice_bob_elements({1.5, 0.0, 0.0, 0.0}), unphysical_error);  // V0 > 1
}

TEST_CASE("alice_bob_covariance rejects uncertainty-violating effective matrices") {
  // The weighted classical variable x_A with g in (0,1) and no modulation has
  // Var_x + Var_p below the Heisenberg floor of any real mode, so the
  // effective matrix is not a quantum state; the constructor must say so.
  CHECK_THROWS_AS(alice_bob_covariance({0.5, 0.0, 0.0, 0.6}), unphysical_error);
  // but the same parameters are perfectly valid protocol parameters
  CHECK_NOTHROW(alice_bob_elements({0.5, 0.0, 0.0, 0.6}));
  // with enough modulation the effective matrix becomes physical again
  CHECK(is_physical(alice_bob_covariance({0.5, 0.0, 3.0, 0.6})));
}

TEST_CASE("optimal_gain_pure") {
  CHECK(optimal_gain_pure(1.0) == 0.0);
  CHECK(optimal_gain_pure(1.25) == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(optimal_gain_pure(1e9) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(optimal_gain_pure(0.9), unphysical_error);
}

TEST_CASE("apply_channel") {
  const Mat g = alice_bob_covariance({1.0, 0.0, 3.0, 0.0});
  CHECK((apply_channel(g, {1.0, 0.0}) - g).max_abs() < 1e-15);

  const Mat dark = apply_channel(g, {0.0, 0.0});
  CHECK(dark(2, 2) == doctest::Approx(1.0));
  CHECK(dark(3, 3) == doctest::Approx(1.0));
  CHECK(std::abs(dark(0, 2)) < 1e-15);

  const Mat lossy = apply_channel(g, {0.95, 0.45});
  CHECK(lossy(2, 2) == doctest::Approx(4.2775).epsilon(1e-12));
  CHECK(lossy(0, 2) == doctest::Approx(std::sqrt(0.95) * 3.0).epsilon(1e-12));
  CHECK(lossy(0, 0) == doctest::Approx(3.0).epsilon(1e-12));  // Alice block unchanged
}

TEST_CASE("bob_detection") {
  const Mat g = alice_bob_covariance({1.0, 0.0, 3.0, 0.0});
  CHECK((bob_detection(g, {1.0, 0.0, 0.0}) - g).max_abs() < 1e-15);

  const Mat lossy = bob_detection(g, {0.85, 0.0, 0.0});
  CHECK(lossy(2, 2) == doctest::Approx(0.85 * 4.0 + 0.15).epsilon(1e-12));

  const Mat noisy = bob_detection(g, {0.85, 0.05, 0.2});
  CHECK(noisy(2, 2) == doctest::Approx(0.85 * 4.0 + 0.15 + 0.25).epsilon(1e-12));
  CHECK(noisy(0, 2) == doctest::Approx(std::sqrt(0.85) * 3.0).epsilon(1e-12));
}

TEST_CASE("channel then detector equals the composed affine map") {
  const Mat g = alice_bob_covariance({1.0, 0.0, 7.0, 0.0});
  const ChannelParams c{0.6, 0.3};
  const DetectorParams d{0.85, 0.05, 0.2};
  const Mat two_step = bob_detection(apply_channel(g, c), d);
  // composed: V -> eff*eta*V + eff*(eta*eps + 1 - eta) + (1 - eff) + el + add
  Mat composed = g;
  const double k = std::sqrt(c.eta * d.efficiency);
  for (int q = 0; q < 2; ++q) {
    composed(q, 2 + q) *= k;
    composed(2 + q, q) *= k;
    composed(2 + q, 2 + q) = d.efficiency * (c.eta * (g(2 + q, 2 + q) + c.epsilon) + 1 - c.eta) +
                             (1 - d.efficiency) + d.electronic_noise + d.trusted_added_noise;
  }
  composed(2, 3) *= c.eta * d.efficiency / (k * k);  // zero anyway
  CHECK((two_step - composed).max_abs() < 1e-12);
}

TEST_CASE("mutual_information") {
  // zero correlations -> zero bits
  Mat uncorr = Mat::identity(4);
  uncorr(0, 0) = uncorr(1, 1) = 3.0;
  CHECK(mutual_information(uncorr) == 0.0);

  // coherent model, lossless: 1/2 log2(4 / (4 - 9/3)) = 1 bit
  const Mat g = alice_bob_covariance({1.0, 0.0, 3.0, 0.0});
  CHECK(mutual_information(g) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(mutual_information_quad(g, Quadrature::x) ==
        doctest::Approx(mutual_information_quad(g, Quadrature::p)).epsilon(1e-12));

  // pure EPR with gain 0.6 against the classical Gaussian MI oracle
  const AliceBobElements e = alice_bob_elements({0.5, 0.0, 0.0, 0.6});
  const double mi = mutual_information_elements(e.v_a, e.c, e.v_b);
  CHECK(mi == doctest::Approx(testutil::gaussian_mi_oracle(e.v_a, e.c, e.v_b)).epsilon(1e-12));
}

TEST_CASE("mutual information is monotone non-decreasing in eta") {
  const ProtocolParams p{0.6, 0.5, 20.0, 0.7};
  const DetectorParams d{0.9, 0.05, 0.0};
  double prev = -1.0;
  for (int i = 1; i <= 16; ++i) {
    const double eta = i / 16.0;
    const double mi = i_ab_analytic(p, {eta, 0.2}, d);
    CHECK(mi >= prev - 1e-12);
    prev = mi;
  }
}

TEST_CASE("distance_to_transmittance") {
  CHECK(distance_to_transmittance(0.0) == 1.0);
  CHECK(distance_to_transmittance(50.0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(distance_to_transmittance(15.0) == doctest::Approx(0.501187233627).epsilon(1e-10));
  CHECK(distance_to_transmittance(10.0, 0.5) == doctest::Approx(std::pow(10.0, -0.5)).epsilon(1e-12));
  CHECK_THROWS_AS(distance_to_transmittance(-1.0), std::invalid_argument);
}

TEST_CASE("param validation") {
  CHECK_THROWS_AS((ChannelParams{1.2, 0.0}.validate()), unphysical_error);
  CHECK_THROWS_AS((ChannelParams{0.5, -0.1}.validate()), unphysical_error);
  CHECK_THROWS_AS((DetectorParams{0.0, 0.0, 0.0}.validate()), unphysical_error);
  CHECK_THROWS_AS((DetectorParams{0.9, -0.1, 0.0}.validate()), unphysical_error);
  CHECK_NOTHROW((DetectorParams{1.0, 0.0, 0.0}.validate()));
}
