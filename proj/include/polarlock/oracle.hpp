// Brute-force optimality reference: exhaustive phase grid followed by
// coordinate descent with step halving.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "polarlock/device.hpp"

namespace polarlock {

struct OracleOptions {
  int grid_points = 64;        // per axis, endpoints included
  double initial_step = 0.05;  // rad
  double final_step = 1e-5;    // rad
};

struct OracleResult {
  double intensity = 0.0;  // best noiseless i_px
  PhaseQuad phases;
};

namespace detail {

/// Noiseless x-port power of the cascade, written out stage by stage.
inline double x_port_power(const JonesVector& sop, const PhaseQuad& p) {
  cplx a = sop.ex * std::polar(1.0, -p[0] / 2.0);
  cplx b = sop.ey * std::polar(1.0, p[0] / 2.0);
  const cplx j{0.0, 1.0};
  double c = std::cos(p[1] / 2.0), s = std::sin(p[1] / 2.0);
  cplx a2 = c * a - j * s * b;
  cplx b2 = -j * s * a + c * b;
  a2 *= std::polar(1.0, -p[2] / 2.0);
  b2 *= std::polar(1.0, p[2] / 2.0);
  c = std::cos(p[3] / 2.0);
  s = std::sin(p[3] / 2.0);
  return std::norm(c * a2 - j * s * b2);
}

}  // namespace detail

/// Maximizes the noiseless LO-port intensity over [0, phase_max]^4. Noise and
/// saturation in `device` are ignored; a static-ER ceiling is applied to the
/// optimum.
inline OracleResult oracle_best(const JonesVector& input_sop, const DeviceParams& device,
                                const OracleOptions& opt = {}) {
  const double span = device.tps.phase_max;
  const int n = opt.grid_points;
  const double dx = span / (n - 1);
  const cplx j{0.0, 1.0};

  std::vector<cplx> half(n);  // e^{-i theta/2}
  std::vector<double> cos_half(n), sin_half(n);
  for (int i = 0; i < n; ++i) {
    half[i] = std::polar(1.0, -i * dx / 2.0);
    cos_half[i] = std::cos(i * dx / 2.0);
    sin_half[i] = std::sin(i * dx / 2.0);
  }

  double best = -1.0;
  std::array<int, 4> arg{};
  for (int i1 = 0; i1 < n; ++i1) {
    const cplx a1 = input_sop.ex * half[i1];
    const cplx b1 = input_sop.ey * std::conj(half[i1]);
    for (int i2 = 0; i2 < n; ++i2) {
      const cplx a2 = cos_half[i2] * a1 - j * sin_half[i2] * b1;
      const cplx b2 = -j * sin_half[i2] * a1 + cos_half[i2] * b1;
      for (int i3 = 0; i3 < n; ++i3) {
        const cplx a3 = a2 * half[i3];
        const cplx b3 = b2 * std::conj(half[i3]);
        for (int i4 = 0; i4 < n; ++i4) {
          const double v = std::norm(cos_half[i4] * a3 - j * sin_half[i4] * b3);
          if (v > best) {
            best = v;
            arg = {i1, i2, i3, i4};
          }
        }
      }
    }
  }

  PhaseQuad p;
  for (std::size_t k = 0; k < 4; ++k) p[k] = arg[k] * dx;
  best = detail::x_port_power(input_sop, p);

  for (double step = opt.initial_step; step >= opt.final_step;) {
    bool improved = false;
    for (std::size_t k = 0; k < 4; ++k) {
      for (double dir : {1.0, -1.0}) {
        PhaseQuad q = p;
        q[k] = std::clamp(q[k] + dir * step, 0.0, span);
        const double v = detail::x_port_power(input_sop, q);
        if (v > best) {
          best = v;
          p = q;
          improved = true;
        }
      }
    }
    if (!improved) step /= 2.0;
  }

  double intensity = best;
  if (device.static_er_db) {
    const double leak = std::pow(10.0, -*device.static_er_db / 10.0);
    const double total = input_sop.norm_sq();
    if (total - best < leak * best) intensity = total / (1.0 + leak);
  }
  return {intensity, p};
}

}  // namespace polarlock
