#include <doctest.h>

#include "cvqkd/optimize.hpp"
#include "test_helpers.hpp"

using namespace cvqkd;

namespace {

ProtocolParams experimental_params(double g = 1.0) {
  const SqueezedSourceSpec s = epr_spec_to_source({3.5, 8.2});
  return {s.v0, s.delta_v0, 23.4, g};
}

}  // namespace

TEST_CASE("golden_max and scan_then_golden find a quadratic maximum") {
  const auto f = [](double x) { return -(x - 0.3) * (x - 0.3); };
  const OptResult g = detail::golden_max(f, 0.0, 1.0, 1e-8);
  CHECK(g.arg == doctest::Approx(0.3).epsilon(1e-6));
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  const OptResult s = detail::scan_then_golden(f, grid, 1e-8);
  CHECK(s.arg == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(s.value == doctest::Approx(0.0));
  // maximum at a grid edge
  const auto h = [](double x) { return x; };
  CHECK(detail::scan_then_golden(h, grid, 1e-8).arg == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("optimize_gain: pure source, ideal channel -> g* = C0/V") {
  // For any modulation, the mutual information is maximized at g = C0 / V
  // (stationary point of C^2 / V_A); for a pure EPR with V = 1.25 that is 0.6.
  const OptResult r = optimize_gain({0.5, 0.0, 10.0, 1.0}, {1.0, 0.0}, {1.0, 0.0, 0.0});
  CHECK(r.arg == doctest::Approx(0.6).epsilon(1e-3));
  ProtocolParams p{0.5, 0.0, 10.0, 0.6};
  CHECK(r.value == doctest::Approx(key_rate(p, {1.0, 0.0}, {1.0, 0.0, 0.0}).key_rate).epsilon(1e-6));
}

TEST_CASE("optimize_gain: vacuum source -> g* = 0") {
  const OptResult r = optimize_gain({1.0, 0.0, 10.0, 1.0}, {1.0, 0.0}, {1.0, 0.0, 0.0});
  CHECK(r.arg < 1e-3);
}

TEST_CASE("optimize_gain at the experimental operating point") {
  const ChannelParams c{0.95, 0.45};
  const DetectorParams d{0.85, 0.0, 0.0};
  const OptResult r = optimize_gain(experimental_params(), c, d);
  CHECK(r.arg == doctest::Approx(0.8733470).epsilon(2e-3));
  // dominance over a spread of fixed gains
  CounterRng rng(1313);
  for (int i = 0; i < 16; ++i) {
    const double g = 1.5 * rng.uniform();
    CHECK(r.value >= key_rate(experimental_params(g), c, d).key_rate - 1e-9);
  }
}

TEST_CASE("optimize_bob_noise never loses to zero added noise") {
  const ChannelParams c{0.95, 0.45};
  const DetectorParams d{0.85, 0.0, 0.0};
  const ProtocolParams p = experimental_params(0.8733470);
  const OptResult r = optimize_bob_noise(p, c, d);
  const double at_zero = key_rate(p, c, d).key_rate;
  CHECK(r.value >= at_zero - 1e-12);
  // at this operating point trusted noise strictly helps
  CHECK(r.value > at_zero + 1e-5);
  CHECK(r.arg > 1.0);
  // dominance over a spread of fixed noise values
  CounterRng rng(1414);
  for (int i = 0; i < 8; ++i) {
    DetectorParams dn = d;
    dn.trusted_added_noise = 50.0 * rng.uniform();
    CHECK(r.value >= key_rate(p, c, dn).key_rate - 1e-9);
  }
}

TEST_CASE("optimize_rate at the experimental operating point") {
  const OptimizedRate r =
      optimize_rate(experimental_params(), {0.95, 0.45}, {0.85, 0.0, 0.0}, true, true);
  CHECK(r.key_rate == doctest::Approx(0.0025146).epsilon(2e-3));
  CHECK(r.g == doctest::Approx(0.8733470).epsilon(2e-3));
  CHECK(r.key_rate == doctest::Approx(r.i_ab - r.chi_be).epsilon(1e-12));
  // pinned coordinates stay pinned
  const OptimizedRate fixed =
      optimize_rate(experimental_params(0.5), {0.95, 0.45}, {0.85, 0.0, 1.0}, false, false);
  CHECK(fixed.g == 0.5);
  CHECK(fixed.bob_noise == 1.0);
}

TEST_CASE("tolerable_excess_noise honors its bisection contract") {
  const ProtocolParams p{1.0, 0.0, 100.0, 0.0};  // coherent protocol
  const DetectorParams d{1.0, 0.0, 0.0};
  const ThresholdResult t = tolerable_excess_noise(p, d, 0.1, true, true);
  CHECK(t.bracket_hi - t.bracket_lo <= 1e-4 + 1e-12);
  CHECK(t.value == doctest::Approx(0.20397).epsilon(5e-3));
  // the rate really changes sign across the reported value
  const auto rate_at = [&](double eps) {
    return optimize_rate(p, {0.1, eps}, d, true, true).key_rate;
  };
  CHECK(rate_at(t.value - 2e-4) > 0.0);
  CHECK(rate_at(t.value + 2e-4) <= 0.0);
  CHECK(std::abs(t.residual_rate) < 1e-4);
}

TEST_CASE("squeezing raises the tolerable excess noise (0.5 dB case)") {
  const DetectorParams d{1.0, 0.0, 0.0};
  const ThresholdResult coh = tolerable_excess_noise({1.0, 0.0, 100.0, 0.0}, d, 0.1, true, true);
  const double v0 = db_to_variance(0.5, DbSense::squeezing);
  const ThresholdResult sq = tolerable_excess_noise({v0, 0.0, 100.0, 0.0}, d, 0.1, true, true);
  CHECK(sq.value > coh.value + 1e-4);
  CHECK(sq.value == doctest::Approx(0.20557).epsilon(5e-3));
}

TEST_CASE("max_tolerable_loss") {
  const ProtocolParams p = experimental_params();
  const DetectorParams d{0.85, 0.0, 0.0};
  const ThresholdResult t = max_tolerable_loss(p, d, 0.45, true, true);
  CHECK_FALSE(t.cap_hit);
  CHECK(t.value > 0.3);
  CHECK(t.value < 0.7);
  CHECK(t.km == doctest::Approx(t.value / 0.2).epsilon(1e-12));
  CHECK(std::abs(t.residual_rate) < 1e-3);

  // pure loss: reverse reconciliation tolerates any loss, so the cap reports
  const ThresholdResult cap = max_tolerable_loss({1.0, 0.0, 10.0, 0.0}, {1.0, 0.0, 0.0}, 0.0,
                                                 true, false);
  CHECK(cap.cap_hit);
  CHECK(cap.value == 60.0);
}

TEST_CASE("sweep is deterministic and fails soft per row") {
  SweepSpec spec;
  spec.variable = SweepVariable::distance_km;
  spec.min = 0.0;
  spec.max = 2.0;
  spec.points = 5;
  spec.protocol = experimental_params();
  spec.channel = {1.0, 0.45};
  spec.detector = {0.85, 0.0, 0.0};
  spec.optimize_g = true;
  spec.optimize_bob_noise = false;
  const auto rows = sweep(spec);
  const auto rows2 = sweep(spec);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].x == 0.0);
  CHECK(rows[4].x == 2.0);
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].key_rate == rows2[i].key_rate);  // bit-identical
    CHECK(rows[i].g_opt == rows2[i].g_opt);
    CHECK(rows[i].error.empty());
  }
  // key rate decreases with distance at fixed excess noise
  for (size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].key_rate < rows[i - 1].key_rate);

  // a sweep over squeezing that wanders into invalid territory records the
  // error for that row and keeps going
  SweepSpec bad = spec;
  bad.variable = SweepVariable::epsilon;
  bad.min = 0.0;
  bad.max = 3.0;
  bad.points = 3;
  const auto brows = sweep(bad);
  CHECK(brows[0].error.empty());
  CHECK(brows[2].error.empty());  // negative rates are results, not errors

  CHECK_THROWS_AS([&] {
    SweepSpec s2 = spec;
    s2.points = 1;
    return sweep(s2);
  }(), std::invalid_argument);
}
