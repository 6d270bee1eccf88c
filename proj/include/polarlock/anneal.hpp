// Variable-step simulated annealing for polarization locking.
//
// The controller maximizes the LO-port intensity i_px over the four stage
// phases. Each inner iteration looks up a step from the gap 1 - I_max,
// perturbs every stage with a boundary-directed random step, measures, and
// applies a Metropolis decision. Temperature falls geometrically once per
// outer loop.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "polarlock/device.hpp"
#include "polarlock/rng.hpp"

namespace polarlock {

/// Gap-bracketed step table. Bracket i applies to gaps in
/// (gap_upper[i+1], gap_upper[i]]; the last bracket extends down to 0.
class StepSchedule {
 public:
  struct Bracket {
    double gap_upper;
    double step;  // rad
  };

  StepSchedule() : StepSchedule(variable()) {}

  explicit StepSchedule(std::vector<Bracket> brackets) : brackets_(std::move(brackets)) {
    validate();
  }

  static StepSchedule variable() {
    return StepSchedule({{1.0, 0.16}, {0.1, 0.08}, {0.01, 0.03}, {0.001, 0.008}});
  }

  static StepSchedule fixed(double step) { return StepSchedule({{1.0, step}}); }

  bool is_fixed() const { return brackets_.size() == 1; }
  const std::vector<Bracket>& brackets() const { return brackets_; }

  double step_for_gap(double gap) const {
    gap = std::clamp(gap, 0.0, 1.0);
    double st = brackets_.front().step;
    for (const auto& b : brackets_) {
      if (gap <= b.gap_upper) st = b.step;
    }
    return st;
  }

 private:
  void validate() const {
    if (brackets_.empty()) throw std::invalid_argument("StepSchedule: no brackets");
    if (brackets_.size() == 1) {
      if (!(brackets_[0].step >= 0.0)) throw std::invalid_argument("StepSchedule: negative step");
      return;
    }
    for (std::size_t i = 0; i < brackets_.size(); ++i) {
      if (!(brackets_[i].step > 0.0)) throw std::invalid_argument("StepSchedule: step must be > 0");
      if (i > 0 && !(brackets_[i].gap_upper < brackets_[i - 1].gap_upper &&
                     brackets_[i].step < brackets_[i - 1].step)) {
        throw std::invalid_argument("StepSchedule: thresholds and steps must strictly decrease");
      }
    }
  }

  std::vector<Bracket> brackets_;
};

inline double step_for_gap(double gap, const StepSchedule& schedule) {
  return schedule.step_for_gap(gap);
}

enum class SteppingMode { phase, voltage };

struct AnnealConfig {
  double t0 = 1e-5;
  int m0 = 10;   // outer loops
  int n0 = 50;   // inner iterations per outer loop
  double cooling_p = 0.5;
  std::optional<double> init_phase;  // default: phase_max / 2
  StepSchedule schedule = StepSchedule::variable();
  SteppingMode mode = SteppingMode::phase;
  std::optional<double> voltage_step;  // fixed dV in voltage mode, overrides the schedule
  bool detect_lock_loss = true;

  int total_iterations() const { return m0 * n0; }

  double initial_phase(const TpsParams& tps) const {
    return init_phase.value_or(tps.phase_max / 2.0);
  }

  void validate(const TpsParams& tps) const {
    if (!(t0 > 0.0)) throw std::invalid_argument("anneal.t0 must be > 0");
    if (m0 < 1 || n0 < 1) throw std::invalid_argument("anneal.m0 and anneal.n0 must be >= 1");
    if (!(cooling_p > 0.0 && cooling_p < 1.0))
      throw std::invalid_argument("anneal.cooling_p must lie in (0, 1)");
    const double ip = initial_phase(tps);
    if (!(ip >= 0.0 && ip <= tps.phase_max))
      throw std::invalid_argument("anneal.init_phase must lie in [0, phase_max]");
    if (voltage_step && !(*voltage_step >= 0.0))
      throw std::invalid_argument("anneal.voltage_step must be >= 0");
  }
};

/// A measurement source: phases in, detector reading out. Two evaluations of
/// the same point may differ only through noise (or a drifting input).
struct Objective {
  std::function<DetectorSample(const PhaseQuad&)> evaluate;
  double noise_sigma = 0.0;

  double intensity_floor() const { return std::max(noise_sigma, 1e-15); }
  double er_db(const DetectorSample& s) const {
    return extinction_ratio_db(std::max(s.i_px, intensity_floor()),
                               std::max(s.i_py, intensity_floor()));
  }
};

/// Binds measure() to a fixed input SOP and its own noise stream.
inline Objective device_objective(const JonesVector& sop, const DeviceParams& params, Rng noise) {
  return {[sop, params, noise](const PhaseQuad& p) mutable { return measure(sop, p, params, noise); },
          params.noise_sigma};
}

struct LockStep {
  int iteration = 0;  // cumulative, 1-based
  double temperature = 0.0;
  double step_rad = 0.0;
  PhaseQuad proposal;
  DetectorSample sample;
  double er_db = 0.0;
  bool accepted = false;
  bool relocked = false;  // lock loss detected; best-so-far restarted here
  double best_intensity = 0.0;
};

struct LockTrace {
  PhaseQuad initial_phases;
  DetectorSample initial_sample;
  std::vector<LockStep> steps;
  double best_intensity = 0.0;  // I_max
  PhaseQuad best_phases;        // S_max
  std::optional<std::array<double, 4>> best_voltages;  // voltage mode only
  int best_iteration = 0;       // 0: the initial evaluation
  int relock_count = 0;
};

/// One stage of the random step: pushed inward at the span boundaries,
/// otherwise moved by sign * step * r. Result clamped to [0, upper].
inline double propose_component(double x, double step, double r, int sign, double upper) {
  double y;
  if (x <= 0.0) {
    y = x + step * r;
  } else if (x >= upper) {
    y = x - step * r;
  } else {
    y = x + sign * step * r;
  }
  return std::clamp(y, 0.0, upper);
}

/// Draws r ~ U[0,1) and a sign in {-1, +1} for each stage.
template <std::uniform_random_bit_generator R>
std::array<double, 4> propose(const std::array<double, 4>& point, double step, double upper, R& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  std::array<double, 4> out{};
  for (std::size_t k = 0; k < 4; ++k) {
    const double r = unit(rng);
    const int sign = coin(rng) ? 1 : -1;
    out[k] = propose_component(point[k], step, r, sign, upper);
  }
  return out;
}

template <std::uniform_random_bit_generator R>
PhaseQuad propose(const PhaseQuad& s_p, double step, R& rng, double upper = 3.0 * kPi) {
  return {propose(s_p.theta, step, upper, rng)};
}

/// Metropolis rule for maximization.
template <std::uniform_random_bit_generator R>
bool accept(double i_new, double i_old, double temperature, R& rng) {
  if (i_new >= i_old) return true;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return unit(rng) < std::exp((i_new - i_old) / temperature);
}

/// Conservative voltage increment for a phase step: the Eq.-(8)-style
/// conversion evaluated at v_max, where dV/dtheta is smallest.
inline double voltage_domain_step(double dtheta, const TpsParams& tps) {
  return phase_step_to_voltage_step(dtheta, tps.v_max, tps);
}

/// Phase step equivalent to a voltage step at v_max.
inline double voltage_step_to_phase_step(double dv, const TpsParams& tps) {
  return 2.0 * tps.c_slope * tps.v_max * dv / tps.resistance;
}

template <std::uniform_random_bit_generator R>
LockTrace run_lock(Objective& objective, const AnnealConfig& cfg, const TpsParams& tps, R& rng) {
  cfg.validate(tps);
  const bool voltage_mode = cfg.mode == SteppingMode::voltage;
  const double upper = voltage_mode ? tps.v_max : tps.phase_max;

  auto to_phases = [&](const std::array<double, 4>& point) {
    if (!voltage_mode) return PhaseQuad{point};
    PhaseQuad p;
    for (std::size_t k = 0; k < 4; ++k) p[k] = voltage_to_phase(point[k], tps);
    return p;
  };

  // Largest per-stage phase change one proposal can make. With
  // |dI/dtheta| <= 1/2 per stage, a static input can drop by at most twice this.
  auto max_phase_change = [&](double coord_step) {
    if (!voltage_mode) return coord_step;
    const double lo = std::max(0.0, tps.v_max - coord_step);
    return tps.c_slope * (tps.v_max * tps.v_max - lo * lo) / tps.resistance;
  };
  const double noise_margin = 12.0 * objective.noise_sigma;

  std::array<double, 4> point{};
  point.fill(voltage_mode ? phase_to_voltage(cfg.initial_phase(tps), tps) : cfg.initial_phase(tps));

  LockTrace trace;
  trace.initial_phases = to_phases(point);
  trace.initial_sample = objective.evaluate(trace.initial_phases);
  trace.steps.reserve(static_cast<std::size_t>(cfg.total_iterations()));

  DetectorSample current = trace.initial_sample;
  double best = current.i_px;
  std::array<double, 4> best_point = point;

  double temperature = cfg.t0;
  int iteration = 0;
  for (int outer = 0; outer < cfg.m0; ++outer) {
    for (int inner = 0; inner < cfg.n0; ++inner) {
      ++iteration;
      double st = cfg.schedule.step_for_gap(1.0 - best);
      double coord_step = st;
      if (voltage_mode) {
        if (cfg.voltage_step) {
          coord_step = *cfg.voltage_step;
          st = voltage_step_to_phase_step(coord_step, tps);
        } else {
          coord_step = voltage_domain_step(st, tps);
        }
      }

      const auto candidate = propose(point, coord_step, upper, rng);
      LockStep row;
      row.iteration = iteration;
      row.temperature = temperature;
      row.step_rad = st;
      row.proposal = to_phases(candidate);
      row.sample = objective.evaluate(row.proposal);
      row.er_db = objective.er_db(row.sample);

      const double drop_bound = 2.0 * max_phase_change(coord_step) + noise_margin;
      if (cfg.detect_lock_loss && row.sample.i_px < best - drop_bound) {
        // The reading is unreachable from the current point: the input moved.
        point = candidate;
        current = row.sample;
        best = current.i_px;
        best_point = point;
        trace.best_iteration = iteration;
        row.accepted = true;
        row.relocked = true;
        ++trace.relock_count;
      } else {
        row.accepted = accept(row.sample.i_px, current.i_px, temperature, rng);
        if (row.accepted) {
          point = candidate;
          current = row.sample;
        }
        if (row.sample.i_px > best) {
          best = row.sample.i_px;
          best_point = candidate;
          trace.best_iteration = iteration;
        }
      }
      row.best_intensity = best;
      trace.steps.push_back(row);
    }
    temperature *= cfg.cooling_p;
  }

  trace.best_intensity = best;
  trace.best_phases = to_phases(best_point);
  if (voltage_mode) trace.best_voltages = best_point;
  return trace;
}

template <std::uniform_random_bit_generator R>
LockTrace run_lock_fixed(Objective& objective, AnnealConfig cfg, double step, const TpsParams& tps,
                         R& rng) {
  if (cfg.mode == SteppingMode::voltage) {
    cfg.voltage_step = step;
  } else {
    cfg.schedule = StepSchedule::fixed(step);
  }
  return run_lock(objective, cfg, tps, rng);
}

}  // namespace polarlock
