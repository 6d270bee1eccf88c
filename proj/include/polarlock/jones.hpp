// Jones-calculus kernel: polarization states, 2x2 transfer matrices,
// Stokes diagnostics and extinction-ratio arithmetic.
//
// Stokes sign convention used throughout:
//   s0 = |ex|^2 + |ey|^2
//   s1 = |ex|^2 - |ey|^2
//   s2 =  2 Re(ex conj(ey))
//   s3 = -2 Im(ex conj(ey))
// so (1, i)/sqrt(2) maps to s3 = -1.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace polarlock {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;

struct JonesVector {
  cplx ex{1.0, 0.0};
  cplx ey{0.0, 0.0};

  double norm_sq() const { return std::norm(ex) + std::norm(ey); }
  double norm() const { return std::sqrt(norm_sq()); }

  JonesVector normalized() const {
    const double n = norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw std::domain_error("JonesVector: cannot normalize zero or non-finite vector");
    }
    return {ex / n, ey / n};
  }

  friend JonesVector operator*(cplx a, const JonesVector& v) { return {a * v.ex, a * v.ey}; }
};

/// Hermitian inner product <a|b>.
inline cplx inner(const JonesVector& a, const JonesVector& b) {
  return std::conj(a.ex) * b.ex + std::conj(a.ey) * b.ey;
}

/// True when a and b describe the same SOP, i.e. they agree up to a complex
/// scale factor: |<a|b>|^2 == |a|^2 |b|^2.
inline bool same_sop(const JonesVector& a, const JonesVector& b, double tol = 1e-12) {
  const double na = a.norm_sq();
  const double nb = b.norm_sq();
  if (na <= 0.0 || nb <= 0.0) return false;
  return std::abs(std::norm(inner(a, b)) / (na * nb) - 1.0) <= tol;
}

struct JonesMatrix {
  cplx m00{1.0, 0.0}, m01{0.0, 0.0};
  cplx m10{0.0, 0.0}, m11{1.0, 0.0};

  static JonesMatrix identity() { return {}; }

  JonesMatrix adjoint() const {
    return {std::conj(m00), std::conj(m10), std::conj(m01), std::conj(m11)};
  }

  friend JonesMatrix operator*(const JonesMatrix& a, const JonesMatrix& b) {
    return {a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
            a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
  }

  friend JonesVector operator*(const JonesMatrix& m, const JonesVector& v) {
    return {m.m00 * v.ex + m.m01 * v.ey, m.m10 * v.ex + m.m11 * v.ey};
  }
};

/// Largest elementwise modulus of a - b.
inline double max_abs_diff(const JonesMatrix& a, const JonesMatrix& b) {
  return std::max({std::abs(a.m00 - b.m00), std::abs(a.m01 - b.m01),
                   std::abs(a.m10 - b.m10), std::abs(a.m11 - b.m11)});
}

/// Largest elementwise deviation of M^dagger M from the identity.
inline double unitarity_error(const JonesMatrix& m) {
  return max_abs_diff(m.adjoint() * m, JonesMatrix::identity());
}

inline bool is_unitary(const JonesMatrix& m, double tol = 1e-12) {
  return unitarity_error(m) <= tol;
}

namespace detail {
inline void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw std::domain_error(std::string(what) + ": non-finite phase");
}
}  // namespace detail

/// Retarder with axes at 0 degrees: diag(e^{-i d/2}, e^{+i d/2}).
inline JonesMatrix make_m0(double delta0) {
  detail::require_finite(delta0, "make_m0");
  const cplx half = std::polar(1.0, -delta0 / 2.0);
  return {half, 0.0, 0.0, std::conj(half)};
}

/// Retarder with axes at 45 degrees.
inline JonesMatrix make_m45(double delta45) {
  detail::require_finite(delta45, "make_m45");
  const double c = std::cos(delta45 / 2.0);
  const double s = std::sin(delta45 / 2.0);
  const cplx off{0.0, -s};
  return {c, off, off, c};
}

/// The two 50/50 coupler matrices that sandwich an M0 section to build the
/// 45-degree retarder on chip: make_m45(d) == coupler_out() * make_m0(d) * coupler_in().
inline JonesMatrix coupler_out() {
  const double h = std::numbers::sqrt2 / 2.0;
  return {h, -h, h, h};
}

inline JonesMatrix coupler_in() {
  const double h = std::numbers::sqrt2 / 2.0;
  return {h, h, -h, h};
}

inline JonesVector apply(const JonesMatrix& m, const JonesVector& v) { return m * v; }

struct StokesParams {
  double s0 = 1.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;

  /// Unit Poincare-sphere direction (s1, s2, s3) / s0.
  std::array<double, 3> direction() const { return {s1 / s0, s2 / s0, s3 / s0}; }
};

inline StokesParams to_stokes(const JonesVector& v) {
  const double s0 = v.norm_sq();
  if (!(s0 > 0.0)) throw std::domain_error("to_stokes: zero Jones vector");
  const cplx cross = v.ex * std::conj(v.ey);
  return {s0, std::norm(v.ex) - std::norm(v.ey), 2.0 * cross.real(), -2.0 * cross.imag()};
}

/// Great-circle distance between two SOPs on the Poincare sphere.
inline double sphere_distance(const JonesVector& a, const JonesVector& b) {
  const auto da = to_stokes(a).direction();
  const auto db = to_stokes(b).direction();
  const double dot = da[0] * db[0] + da[1] * db[1] + da[2] * db[2];
  return std::acos(std::clamp(dot, -1.0, 1.0));
}

/// Normalized SOP drawn uniformly on the Poincare sphere. A uniform point on
/// S^3 (four normalized Gaussians) projects to a uniform point on S^2.
template <std::uniform_random_bit_generator Rng>
JonesVector random_sop(Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (;;) {
    const double a = gauss(rng), b = gauss(rng), c = gauss(rng), d = gauss(rng);
    const double n = std::sqrt(a * a + b * b + c * c + d * d);
    if (n > 1e-12) return {cplx{a / n, b / n}, cplx{c / n, d / n}};
  }
}

inline JonesVector random_sop(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_sop(rng);
}

/// 10 log10(i_px / i_py).
inline double extinction_ratio_db(double i_px, double i_py) {
  if (!(i_px > 0.0) || !(i_py > 0.0)) {
    throw std::domain_error("extinction_ratio_db: intensities must be positive");
  }
  return 10.0 * std::log10(i_px / i_py);
}

}  // namespace polarlock
