// Channel disturbances acting on the input SOP ahead of the chip, modeled
// as rotations of the Poincare sphere.

#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>

#include "polarlock/anneal.hpp"
#include "polarlock/jones.hpp"
#include "polarlock/rng.hpp"

namespace polarlock {

using Axis3 = std::array<double, 3>;

/// SU(2) element that rotates Stokes vectors by `angle` about `axis`
/// (unit vector in (s1, s2, s3) coordinates). Under this file's Stokes
/// convention s1, s2, s3 are generated by sigma_z, sigma_x, sigma_y.
inline JonesMatrix poincare_rotation(const Axis3& axis, double angle) {
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  const auto [n1, n2, n3] = axis;
  // n1 sz + n2 sx + n3 sy = [[n1, n2 - i n3], [n2 + i n3, -n1]]
  const cplx mi{0.0, -s};
  return {c + mi * n1, mi * cplx{n2, -n3}, mi * cplx{n2, n3}, c - mi * n1};
}

template <std::uniform_random_bit_generator R>
Axis3 random_axis(R& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (;;) {
    Axis3 a{gauss(rng), gauss(rng), gauss(rng)};
    const double n = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
    if (n > 1e-12) return {a[0] / n, a[1] / n, a[2] / n};
  }
}

struct DisturbanceModel {
  enum class Kind { static_sop, drift, jump };

  Kind kind = Kind::static_sop;
  double drift_rate = 0.0;      // rad of sphere rotation per iteration
  int jump_at = 250;            // iteration at which the jump is first seen
  double jump_magnitude = 0.0;  // rad

  void validate() const {
    if (!(drift_rate >= 0.0)) throw std::invalid_argument("disturbance.drift_rate must be >= 0");
    if (!(jump_magnitude >= 0.0 && jump_magnitude <= kPi))
      throw std::invalid_argument("disturbance.jump_magnitude must lie in [0, pi]");
    if (jump_at < 0) throw std::invalid_argument("disturbance.jump_at must be >= 0");
  }
};

/// Stateful SOP evolution for one trial. The drift axis performs a random
/// walk; all randomness comes from the stream given at construction.
class ChannelDisturbance {
 public:
  ChannelDisturbance(DisturbanceModel model, Rng rng) : model_(model), rng_(std::move(rng)) {
    model_.validate();
    if (model_.kind == DisturbanceModel::Kind::drift) axis_ = random_axis(rng_);
  }

  const DisturbanceModel& model() const { return model_; }

  JonesVector evolve(const JonesVector& sop, int iteration) {
    switch (model_.kind) {
      case DisturbanceModel::Kind::static_sop:
        return sop;
      case DisturbanceModel::Kind::drift: {
        std::normal_distribution<double> kick(0.0, kAxisWalk);
        Axis3 a{axis_[0] + kick(rng_), axis_[1] + kick(rng_), axis_[2] + kick(rng_)};
        const double n = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
        axis_ = {a[0] / n, a[1] / n, a[2] / n};
        return poincare_rotation(axis_, model_.drift_rate) * sop;
      }
      case DisturbanceModel::Kind::jump:
        if (iteration != model_.jump_at) return sop;
        return poincare_rotation(random_axis(rng_), model_.jump_magnitude) * sop;
    }
    return sop;
  }

 private:
  static constexpr double kAxisWalk = 0.1;

  DisturbanceModel model_;
  Rng rng_;
  Axis3 axis_{1.0, 0.0, 0.0};
};

/// Objective whose input SOP evolves once per controller iteration.
/// Evaluation 0 is the controller's initial reading; evaluation k is
/// iteration k.
inline Objective disturbed_objective(const JonesVector& sop, const DeviceParams& params, Rng noise,
                                     ChannelDisturbance disturbance) {
  struct State {
    JonesVector sop;
    DeviceParams params;
    Rng noise;
    ChannelDisturbance disturbance;
    int calls = 0;
  };
  auto state = std::make_shared<State>(State{sop, params, std::move(noise), std::move(disturbance)});
  return {[state](const PhaseQuad& p) {
            if (state->calls > 0) state->sop = state->disturbance.evolve(state->sop, state->calls);
            ++state->calls;
            return measure(state->sop, p, state->params, state->noise);
          },
          params.noise_sigma};
}

struct RelockResult {
  LockTrace trace;
  std::optional<int> recovery_iterations;  // counted from the jump iteration
};

/// First iteration at or after the jump whose reading reaches threshold_db,
/// relative to the jump.
inline std::optional<int> recovery_after(const LockTrace& trace, int jump_at, double threshold_db) {
  for (const auto& row : trace.steps) {
    if (row.iteration >= jump_at && row.er_db >= threshold_db) return row.iteration - jump_at;
  }
  return std::nullopt;
}

/// Locks onto a random input SOP (drawn from the seed's input stream) while
/// the channel follows `model`.
inline RelockResult relock_experiment(const DeviceParams& device, const AnnealConfig& cfg,
                                      const DisturbanceModel& model, std::uint64_t seed,
                                      double threshold_db = 20.0) {
  Rng sop_rng = make_stream(seed, Stream::input_sop);
  const JonesVector sop = random_sop(sop_rng);
  Objective objective = disturbed_objective(sop, device, make_stream(seed, Stream::noise),
                                            ChannelDisturbance(model, make_stream(seed, Stream::disturbance)));
  Rng anneal_rng = make_stream(seed, Stream::anneal);
  RelockResult result;
  result.trace = run_lock(objective, cfg, device.tps, anneal_rng);
  result.recovery_iterations = recovery_after(result.trace, model.jump_at, threshold_db);
  return result;
}

}  // namespace polarlock
