// Simulated integrated polarization controller: thermo-optic phase shifters,
// the four-stage M0/M45/M0/M45 cascade, the 2D grating coupler acting as a
// PBS with a finite static extinction ratio, and noisy detectors.

#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

#include "polarlock/jones.hpp"

namespace polarlock {

/// Thermal phase shifter constants. c_slope is in rad/W.
struct TpsParams {
  double resistance = 1970.0;       // ohm
  double c_slope = 164.85;          // rad / W
  double theta_bias = 0.93;         // rad
  double v_max = 10.0;              // V
  double phase_max = 3.0 * kPi;     // rad, search span of each stage
  double rise_time = 11e-6;         // s, step onset to 90% of swing
  double fall_time = 5.9e-6;        // s

  void validate() const {
    if (!(resistance > 0.0)) throw std::invalid_argument("tps.resistance must be > 0");
    if (!(c_slope > 0.0)) throw std::invalid_argument("tps.c_slope must be > 0");
    if (!(theta_bias >= 0.0 && theta_bias < 2.0 * kPi))
      throw std::invalid_argument("tps.theta_bias must lie in [0, 2pi)");
    if (!(v_max > 0.0)) throw std::invalid_argument("tps.v_max must be > 0");
    if (!(phase_max > 0.0)) throw std::invalid_argument("tps.phase_max must be > 0");
    if (!(rise_time > 0.0)) throw std::invalid_argument("tps.rise_time must be > 0");
    if (!(fall_time > 0.0)) throw std::invalid_argument("tps.fall_time must be > 0");
  }

  // First-order time constants; the 90% point of e^{-t/tau} is tau ln 10.
  double tau_rise() const { return rise_time / std::log(10.0); }
  double tau_fall() const { return fall_time / std::log(10.0); }
  double bandwidth_hz() const { return 1.0 / (2.0 * kPi * tau_rise()); }
};

/// P = V^2 / R.
inline double voltage_to_power(double v, const TpsParams& tps) {
  if (!(v >= 0.0 && v <= tps.v_max)) {
    throw std::out_of_range("voltage_to_power: voltage " + std::to_string(v) +
                            " outside [0, v_max]");
  }
  return v * v / tps.resistance;
}

/// Linear thermo-optic response: theta = c P + theta_bias.
inline double power_to_phase(double p, const TpsParams& tps) {
  if (!(p >= 0.0)) throw std::out_of_range("power_to_phase: negative power");
  return tps.c_slope * p + tps.theta_bias;
}

inline double voltage_to_phase(double v, const TpsParams& tps) {
  return power_to_phase(voltage_to_power(v, tps), tps);
}

/// Inverse of voltage_to_phase, clamped to [0, v_max].
inline double phase_to_voltage(double theta, const TpsParams& tps) {
  const double p = std::max(0.0, (theta - tps.theta_bias) / tps.c_slope);
  return std::min(std::sqrt(p * tps.resistance), tps.v_max);
}

/// Voltage increment giving a phase increment dtheta at operating voltage v:
/// dV = R dtheta / (2 c V).
inline double phase_step_to_voltage_step(double dtheta, double v, const TpsParams& tps) {
  if (!(v > 0.0)) {
    throw std::domain_error("phase_step_to_voltage_step: singular at v = 0");
  }
  return tps.resistance * dtheta / (2.0 * tps.c_slope * v);
}

/// Phase of a heater stepped from v_from to v_to, t seconds after the step.
inline double thermal_step_response(double v_from, double v_to, double t,
                                    const TpsParams& tps) {
  if (!(t >= 0.0)) throw std::out_of_range("thermal_step_response: negative time");
  const double from = voltage_to_phase(v_from, tps);
  const double to = voltage_to_phase(v_to, tps);
  const double tau = to >= from ? tps.tau_rise() : tps.tau_fall();
  return to + (from - to) * std::exp(-t / tau);
}

/// The four stage phases (theta1..theta4) of the controller.
struct PhaseQuad {
  std::array<double, 4> theta{};

  static PhaseQuad filled(double value) { return {{value, value, value, value}}; }

  double& operator[](std::size_t i) { return theta[i]; }
  double operator[](std::size_t i) const { return theta[i]; }
  friend bool operator==(const PhaseQuad&, const PhaseQuad&) = default;
};

/// Cascade transfer matrix, stage 1 applied first:
/// M45(t4) M0(t3) M45(t2) M0(t1).
inline JonesMatrix dpc_transform(const PhaseQuad& p) {
  return make_m45(p[3]) * make_m0(p[2]) * make_m45(p[1]) * make_m0(p[0]);
}

struct DeviceParams {
  TpsParams tps{};
  std::optional<double> static_er_db = 28.0;   // nullopt: ideal PBS
  double noise_sigma = 5e-4;
  double coupling_loss_db = 7.0;   // per grating coupler
  double on_chip_loss_db = 3.0;
  std::optional<double> detector_saturation;  // normalized intensity

  void validate() const {
    tps.validate();
    if (static_er_db && !(*static_er_db > 0.0))
      throw std::invalid_argument("device.static_er_db must be > 0");
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("device.noise_sigma must be >= 0");
    if (!(coupling_loss_db >= 0.0) || !(on_chip_loss_db >= 0.0))
      throw std::invalid_argument("device losses must be >= 0");
    if (detector_saturation && !(*detector_saturation > 0.0))
      throw std::invalid_argument("device.detector_saturation must be > 0");
  }

  /// No static-ER ceiling, no noise, no saturation.
  static DeviceParams ideal() {
    DeviceParams d;
    d.static_er_db.reset();
    d.noise_sigma = 0.0;
    return d;
  }

  static DeviceParams noiseless() {
    DeviceParams d;
    d.noise_sigma = 0.0;
    return d;
  }

  /// Fiber-to-fiber loss: two grating couplers plus on-chip transmission.
  double insertion_loss_db() const { return 2.0 * coupling_loss_db + on_chip_loss_db; }

  /// Smallest intensity the ER calculation trusts.
  double intensity_floor() const { return std::max(noise_sigma, 1e-15); }
};

/// Normalized detector readings. i_px is the LO-path port the controller
/// maximizes, i_py the orthogonal port.
struct DetectorSample {
  double i_px = 0.0;
  double i_py = 0.0;

  friend bool operator==(const DetectorSample&, const DetectorSample&) = default;
};

/// ER of a reading after clamping both ports at the device's noise floor.
inline double measured_er_db(const DetectorSample& s, const DeviceParams& params) {
  const double floor = params.intensity_floor();
  return extinction_ratio_db(std::max(s.i_px, floor), std::max(s.i_py, floor));
}

/// Absolute detector powers for an input power in watts.
inline DetectorSample to_absolute(const DetectorSample& s, double input_watts,
                                  const DeviceParams& params) {
  const double t = std::pow(10.0, -params.insertion_loss_db() / 10.0) * input_watts;
  return {s.i_px * t, s.i_py * t};
}

/// Noise-free port powers, including the static-ER leakage. The leakage
/// redistributes power so that i_px + i_py is conserved and the ratio sits
/// exactly at the ceiling.
inline DetectorSample ideal_ports(const JonesVector& input_sop, const PhaseQuad& phases,
                                  const DeviceParams& params) {
  const JonesVector out = dpc_transform(phases) * input_sop;
  DetectorSample s{std::norm(out.ex), std::norm(out.ey)};
  if (params.static_er_db) {
    const double leak = std::pow(10.0, -*params.static_er_db / 10.0);
    if (s.i_py < leak * s.i_px) {
      const double total = s.i_px + s.i_py;
      s.i_px = total / (1.0 + leak);
      s.i_py = total * leak / (1.0 + leak);
    }
  }
  return s;
}

/// One detector reading: ideal ports, additive Gaussian noise per port,
/// clamped to [0, saturation].
template <std::uniform_random_bit_generator Rng>
DetectorSample measure(const JonesVector& input_sop, const PhaseQuad& phases,
                       const DeviceParams& params, Rng& rng) {
  DetectorSample s = ideal_ports(input_sop, phases, params);
  if (params.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, params.noise_sigma);
    s.i_px += noise(rng);
    s.i_py += noise(rng);
  }
  const double hi = params.detector_saturation.value_or(INFINITY);
  s.i_px = std::clamp(s.i_px, 0.0, hi);
  s.i_py = std::clamp(s.i_py, 0.0, hi);
  return s;
}

}  // namespace polarlock
