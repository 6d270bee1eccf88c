// Experiment configuration file.
//
// Plain text, one `key = value` per line. Keys are dotted (`tps.resistance`);
// a `[section]` line prefixes the undotted keys that follow it. `#` and `;`
// start comments. Every key is optional and defaults to the calibrated
// device and controller values, so an empty file is a valid configuration.
//
//   tps.resistance            ohm              1970
//   tps.c_slope               rad/W            164.85
//   tps.theta_bias            rad              0.93
//   tps.v_max                 V                10
//   tps.phase_max             rad              3*pi
//   tps.rise_time             s                11e-6
//   tps.fall_time             s                5.9e-6
//   device.static_er_db       dB or none       28
//   device.noise_sigma                         5e-4
//   device.coupling_loss_db   dB               7
//   device.on_chip_loss_db    dB               3
//   device.detector_saturation  value or none  none
//   anneal.t0                                  1e-5
//   anneal.m0                                  10
//   anneal.n0                                  50
//   anneal.cooling_p                           0.5
//   anneal.init_phase         rad              phase_max / 2
//   anneal.schedule           gap:step list    1:0.16, 0.1:0.08, 0.01:0.03, 0.001:0.008
//   anneal.mode               phase|voltage    phase
//   anneal.detect_lock_loss   true|false       true
//   disturbance.kind          static|drift|jump  static
//   disturbance.drift_rate    rad/iteration    0
//   disturbance.jump_at       iteration        250
//   disturbance.jump_magnitude  rad            0
//   disturbance.threshold_db  dB               20
//   experiment.variants       list             variable
//   experiment.trials                          1
//   experiment.base_seed                       1
//   experiment.output         path             polarlock.csv

#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "polarlock/experiment.hpp"

namespace polarlock {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
  if (used != v.size()) throw ConfigError(key, "expected a number, got '" + v + "'");
  return x;
}

inline long long to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x)) throw ConfigError(key, "expected an integer, got '" + v + "'");
  return static_cast<long long>(x);
}

inline bool is_none(const std::string& v) { return v == "none" || v == "off"; }

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& v)>;

inline const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> m;
    m["tps.resistance"] = [](auto& c, auto& k, auto& v) { c.device.tps.resistance = to_double(k, v); };
    m["tps.c_slope"] = [](auto& c, auto& k, auto& v) { c.device.tps.c_slope = to_double(k, v); };
    m["tps.theta_bias"] = [](auto& c, auto& k, auto& v) { c.device.tps.theta_bias = to_double(k, v); };
    m["tps.v_max"] = [](auto& c, auto& k, auto& v) { c.device.tps.v_max = to_double(k, v); };
    m["tps.phase_max"] = [](auto& c, auto& k, auto& v) { c.device.tps.phase_max = to_double(k, v); };
    m["tps.rise_time"] = [](auto& c, auto& k, auto& v) { c.device.tps.rise_time = to_double(k, v); };
    m["tps.fall_time"] = [](auto& c, auto& k, auto& v) { c.device.tps.fall_time = to_double(k, v); };
    m["device.static_er_db"] = [](auto& c, auto& k, auto& v) {
      if (is_none(v)) c.device.static_er_db.reset();
      else c.device.static_er_db = to_double(k, v);
    };
    m["device.noise_sigma"] = [](auto& c, auto& k, auto& v) { c.device.noise_sigma = to_double(k, v); };
    m["device.coupling_loss_db"] = [](auto& c, auto& k, auto& v) {
      c.device.coupling_loss_db = to_double(k, v);
    };
    m["device.on_chip_loss_db"] = [](auto& c, auto& k, auto& v) {
      c.device.on_chip_loss_db = to_double(k, v);
    };
    m["device.detector_saturation"] = [](auto& c, auto& k, auto& v) {
      if (is_none(v)) c.device.detector_saturation.reset();
      else c.device.detector_saturation = to_double(k, v);
    };
    m["anneal.t0"] = [](auto& c, auto& k, auto& v) { c.anneal.t0 = to_double(k, v); };
    m["anneal.m0"] = [](auto& c, auto& k, auto& v) { c.anneal.m0 = static_cast<int>(to_int(k, v)); };
    m["anneal.n0"] = [](auto& c, auto& k, auto& v) { c.anneal.n0 = static_cast<int>(to_int(k, v)); };
    m["anneal.cooling_p"] = [](auto& c, auto& k, auto& v) { c.anneal.cooling_p = to_double(k, v); };
    m["anneal.init_phase"] = [](auto& c, auto& k, auto& v) { c.anneal.init_phase = to_double(k, v); };
    m["anneal.schedule"] = [](auto& c, auto& k, auto& v) {
      std::vector<StepSchedule::Bracket> brackets;
      for (const auto& item : split(v, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ConfigError(k, "expected gap:step pairs, got '" + item + "'");
        brackets.push_back({to_double(k, trim(item.substr(0, colon))),
                            to_double(k, trim(item.substr(colon + 1)))});
      }
      try {
        c.anneal.schedule = StepSchedule(std::move(brackets));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(k, e.what());
      }
    };
    m["anneal.mode"] = [](auto& c, auto& k, auto& v) {
      if (v == "phase") c.anneal.mode = SteppingMode::phase;
      else if (v == "voltage") c.anneal.mode = SteppingMode::voltage;
      else throw ConfigError(k, "expected phase or voltage, got '" + v + "'");
    };
    m["anneal.detect_lock_loss"] = [](auto& c, auto& k, auto& v) {
      c.anneal.detect_lock_loss = to_bool(k, v);
    };
    m["disturbance.kind"] = [](auto& c, auto& k, auto& v) {
      using K = DisturbanceModel::Kind;
      if (v == "static") c.disturbance.kind = K::static_sop;
      else if (v == "drift") c.disturbance.kind = K::drift;
      else if (v == "jump") c.disturbance.kind = K::jump;
      else throw ConfigError(k, "expected static, drift or jump, got '" + v + "'");
    };
    m["disturbance.drift_rate"] = [](auto& c, auto& k, auto& v) {
      c.disturbance.drift_rate = to_double(k, v);
    };
    m["disturbance.jump_at"] = [](auto& c, auto& k, auto& v) {
      c.disturbance.jump_at = static_cast<int>(to_int(k, v));
    };
    m["disturbance.jump_magnitude"] = [](auto& c, auto& k, auto& v) {
      c.disturbance.jump_magnitude = to_double(k, v);
    };
    m["disturbance.threshold_db"] = [](auto& c, auto& k, auto& v) {
      c.relock_threshold_db = to_double(k, v);
    };
    m["experiment.variants"] = [](auto& c, auto& k, auto& v) {
      c.variants.clear();
      for (const auto& item : split(v, ',')) {
        try {
          c.variants.push_back(Variant::parse(item));
        } catch (const std::invalid_argument& e) {
          throw ConfigError(k, e.what());
        }
      }
    };
    m["experiment.trials"] = [](auto& c, auto& k, auto& v) { c.trials = static_cast<int>(to_int(k, v)); };
    m["experiment.base_seed"] = [](auto& c, auto& k, auto& v) {
      const long long s = to_int(k, v);
      if (s < 0) throw ConfigError(k, "seed must be non-negative");
      c.base_seed = static_cast<std::uint64_t>(s);
    };
    m["experiment.output"] = [](auto& c, auto&, auto& v) { c.output_path = v; };
    return m;
  }();
  return table;
}

}  // namespace detail

inline std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : detail::setters()) keys.push_back(k);
  return keys;
}

/// Resolves an undotted key ("noise_sigma") to its unique full name.
inline std::string resolve_key(const std::string& key) {
  const auto& table = detail::setters();
  if (table.count(key)) return key;
  std::string found;
  for (const auto& [full, _] : table) {
    if (full.size() > key.size() && full.compare(full.size() - key.size(), key.size(), key) == 0 &&
        full[full.size() - key.size() - 1] == '.') {
      if (!found.empty()) throw ConfigError(key, "ambiguous key");
      found = full;
    }
  }
  if (found.empty()) throw ConfigError(key, "unknown configuration key");
  return found;
}

inline void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const std::string full = resolve_key(key);
  detail::setters().at(full)(cfg, full, detail::trim(value));
}

inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("", "line " + std::to_string(lineno) + ": bad section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", "line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = detail::trim(line.substr(0, eq));
    if (!section.empty() && key.find('.') == std::string::npos) key = section + "." + key;
    if (!detail::setters().count(key)) throw ConfigError(key, "unknown configuration key");
    detail::setters().at(key)(cfg, key, detail::trim(line.substr(eq + 1)));
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", e.what());
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace polarlock
