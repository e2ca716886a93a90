#ifndef CVQKD_STATES_HPP
#define CVQKD_STATES_HPP

#include "symplectic.hpp"

// Constructors for the Gaussian states the protocol uses, plus dB bridges.

namespace cvqkd {

enum class DbSense { squeezing, antisqueezing };

inline double db_to_variance(double db, DbSense sense) {
  if (db < 0.0) throw std::invalid_argument("db_to_variance: dB value must be >= 0");
  return sense == DbSense::squeezing ? std::pow(10.0, -db / 10.0) : std::pow(10.0, db / 10.0);
}

inline double variance_to_db(double v, DbSense sense) {
  if (!(v > 0.0)) throw std::invalid_argument("variance_to_db: variance must be positive");
  const double db = -10.0 * std::log10(v);
  return sense == DbSense::squeezing ? db : -db;
}

// Single-mode squeezed source: squeezed variance v0, antisqueezed 1/v0 + dv0.
struct SqueezedSourceSpec {
  double v0 = 1.0;
  double delta_v0 = 0.0;

  void validate() const {
    if (!(v0 > 0.0)) throw unphysical_error("SqueezedSourceSpec: V0 must be positive");
    if (delta_v0 < 0.0) throw unphysical_error("SqueezedSourceSpec: delta_V0 must be >= 0");
    if (1.0 / v0 + delta_v0 < v0 - 1e-12)
      throw unphysical_error("SqueezedSourceSpec: antisqueezed variance below squeezed variance");
  }
};

// Two-mode squeezing figures in dB: joint-quadrature variances
// 10^(-tms/10) (squeezed) and 10^(anti/10) (antisqueezed).
struct EprSpec {
  double tms_db = 0.0;
  double anti_db = 0.0;

  void validate() const {
    if (tms_db < 0.0) throw unphysical_error("EprSpec: tms_db must be >= 0");
    if (anti_db < tms_db - 1e-12) throw unphysical_error("EprSpec: anti_db must be >= tms_db");
  }
};

// Equivalent single-mode source parameters: V0 = 10^(-tms/10),
// delta_V0 = 10^(anti/10) - 10^(tms/10) (excess over minimum uncertainty).
inline SqueezedSourceSpec epr_spec_to_source(const EprSpec& e) {
  e.validate();
  const double v0 = db_to_variance(e.tms_db, DbSense::squeezing);
  const double anti = db_to_variance(e.anti_db, DbSense::antisqueezing);
  return SqueezedSourceSpec{v0, anti - 1.0 / v0};
}

inline Mat squeezed_vacuum(const SqueezedSourceSpec& spec, Quadrature orientation) {
  spec.validate();
  Mat g(2, 2);
  const double anti = 1.0 / spec.v0 + spec.delta_v0;
  if (orientation == Quadrature::x) {
    g(0, 0) = spec.v0;
    g(1, 1) = anti;
  } else {
    g(0, 0) = anti;
    g(1, 1) = spec.v0;
  }
  return g;
}

// Writes a standard EPR/two-mode-squeezed block over modes (a, b):
// diagonals V, correlations +c on x and -c on p with c = sqrt(V^2 - 1).
inline void put_epr(Mat& g, int a, int b, double v) {
  if (v < 1.0 - 1e-12) throw unphysical_error("put_epr: EPR variance must be >= 1");
  const double c = std::sqrt(std::max(v * v - 1.0, 0.0));
  for (int q = 0; q < 2; ++q) {
    const double sign = (q == 0) ? 1.0 : -1.0;
    g(2 * a + q, 2 * a + q) = v;
    g(2 * b + q, 2 * b + q) = v;
    g(2 * a + q, 2 * b + q) = sign * c;
    g(2 * b + q, 2 * a + q) = sign * c;
  }
}

inline Mat epr_state(double v) {
  Mat g = Mat::identity(4);
  put_epr(g, 0, 1, v);
  return g;
}

// Interfere an x-squeezed and a p-squeezed mode on a 50:50 beamsplitter.
// For pure symmetric inputs this is the standard EPR state with
// V_EPR = (1 + V0^2) / (2 V0).
inline Mat epr_from_squeezers(const SqueezedSourceSpec& spec1, const SqueezedSourceSpec& spec2) {
  spec1.validate();
  spec2.validate();
  Mat g = Mat::identity(4);
  const Mat s1 = squeezed_vacuum(spec1, Quadrature::x);
  const Mat s2 = squeezed_vacuum(spec2, Quadrature::p);
  for (int q = 0; q < 2; ++q) {
    g(q, q) = s1(q, q);
    g(2 + q, 2 + q) = s2(q, q);
  }
  return apply_symplectic(g, beamsplitter(0.5, 0, 1, 2));
}

// Symmetric two-mode state with the given joint-quadrature dB figures:
// Var((x1-x2)/sqrt2) = Var((p1+p2)/sqrt2) = 10^(-tms/10),
// Var((x1+x2)/sqrt2) = Var((p1-p2)/sqrt2) = 10^(anti/10).
inline Mat experimental_epr(const EprSpec& spec) {
  spec.validate();
  const double sq = db_to_variance(spec.tms_db, DbSense::squeezing);
  const double anti = db_to_variance(spec.anti_db, DbSense::antisqueezing);
  const double v = 0.5 * (anti + sq);
  const double c = 0.5 * (anti - sq);
  Mat g = Mat::identity(4);
  for (int q = 0; q < 2; ++q) {
    const double sign = (q == 0) ? 1.0 : -1.0;
    g(q, q) = v;
    g(2 + q, 2 + q) = v;
    g(q, 2 + q) = sign * c;
    g(2 + q, q) = sign * c;
  }
  if (!is_physical(g)) throw unphysical_error("experimental_epr: dB combination is unphysical");
  return g;
}

}  // namespace cvqkd

#endif  // CVQKD_STATES_HPP
