// Algebraic self-check run by `polarlock validate`.

#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "polarlock/device.hpp"
#include "polarlock/jones.hpp"

namespace polarlock {

struct IdentityCheck {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed() const { return max_error <= tolerance; }
};

/// Coupler decomposition of M45, unitarity of every stage and cascade, norm
/// preservation and Stokes consistency over `samples` random draws in [0, 3pi].
inline std::vector<IdentityCheck> identity_suite(int samples = 1000, std::uint64_t seed = 7,
                                                 double tol = 1e-12) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 3.0 * kPi);

  IdentityCheck decomposition{"m45_coupler_decomposition", 0.0, tol};
  IdentityCheck unitary_m0{"m0_unitary", 0.0, tol};
  IdentityCheck unitary_m45{"m45_unitary", 0.0, tol};
  IdentityCheck unitary_cascade{"cascade_unitary", 0.0, tol};
  IdentityCheck norm{"norm_preservation", 0.0, tol};
  IdentityCheck stokes{"stokes_unit_sphere", 0.0, tol};

  for (int i = 0; i < samples; ++i) {
    const double d = phase(rng);
    const JonesMatrix m45 = make_m45(d);
    decomposition.max_error =
        std::max(decomposition.max_error, max_abs_diff(m45, coupler_out() * make_m0(d) * coupler_in()));
    unitary_m0.max_error = std::max(unitary_m0.max_error, unitarity_error(make_m0(d)));
    unitary_m45.max_error = std::max(unitary_m45.max_error, unitarity_error(m45));

    const PhaseQuad p{{phase(rng), phase(rng), phase(rng), phase(rng)}};
    const JonesMatrix cascade = dpc_transform(p);
    unitary_cascade.max_error = std::max(unitary_cascade.max_error, unitarity_error(cascade));

    const JonesVector v = random_sop(rng);
    norm.max_error = std::max(norm.max_error, std::abs((cascade * v).norm() - v.norm()));
    const StokesParams s = to_stokes(v);
    stokes.max_error =
        std::max(stokes.max_error, std::abs(s.s1 * s.s1 + s.s2 * s.s2 + s.s3 * s.s3 - 1.0));
  }
  return {decomposition, unitary_m0, unitary_m45, unitary_cascade, norm, stokes};
}

}  // namespace polarlock
