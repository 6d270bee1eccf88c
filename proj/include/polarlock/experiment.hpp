// Seeded trial ensembles across controller variants, percentile aggregation,
// CSV output and the key:value summary.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "polarlock/anneal.hpp"
#include "polarlock/device.hpp"
#include "polarlock/disturbance.hpp"
#include "polarlock/rng.hpp"

namespace polarlock {

/// Controller variant: the gap-driven schedule, a fixed phase step (rad), or
/// a fixed voltage step (V).
struct Variant {
  enum class Kind { variable, fixed, voltage_fixed };

  Kind kind = Kind::variable;
  double value = 0.0;

  static Variant variable() { return {}; }
  static Variant fixed(double step_rad) { return {Kind::fixed, step_rad}; }
  static Variant voltage_fixed(double step_v) { return {Kind::voltage_fixed, step_v}; }

  /// Accepts "variable", "fixed:<rad>" and "vfixed:<volts>".
  static Variant parse(const std::string& text) {
    if (text == "variable") return variable();
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("unknown variant '" + text + "'");
    const std::string head = text.substr(0, colon);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text.substr(colon + 1), &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad variant step in '" + text + "'");
    }
    if (used != text.size() - colon - 1 || !(v >= 0.0))
      throw std::invalid_argument("bad variant step in '" + text + "'");
    if (head == "fixed") return fixed(v);
    if (head == "vfixed") return voltage_fixed(v);
    throw std::invalid_argument("unknown variant '" + text + "'");
  }

  std::string name() const {
    if (kind == Kind::variable) return "variable";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s:%g", kind == Kind::fixed ? "fixed" : "vfixed", value);
    return buf;
  }

  AnnealConfig apply(AnnealConfig cfg) const {
    switch (kind) {
      case Kind::variable:
        break;
      case Kind::fixed:
        cfg.schedule = StepSchedule::fixed(value);
        break;
      case Kind::voltage_fixed:
        cfg.mode = SteppingMode::voltage;
        cfg.voltage_step = value;
        break;
    }
    return cfg;
  }
};

struct ExperimentConfig {
  DeviceParams device{};
  AnnealConfig anneal{};
  DisturbanceModel disturbance{};
  double relock_threshold_db = 20.0;
  std::vector<Variant> variants{Variant::variable()};
  int trials = 1;
  std::uint64_t base_seed = 1;
  std::string output_path = "polarlock.csv";

  void validate() const {
    device.validate();
    anneal.validate(device.tps);
    disturbance.validate();
    if (trials < 1) throw std::invalid_argument("experiment.trials must be >= 1");
    if (variants.empty()) throw std::invalid_argument("experiment.variants must not be empty");
  }
};

struct ResultRow {
  std::size_t variant = 0;  // index into ResultsTable::variants
  int trial = 0;
  int iteration = 0;
  double temperature = 0.0;
  double step_rad = 0.0;
  double i_px = 0.0;
  double i_py = 0.0;
  double er_db = 0.0;
  bool accepted = false;
};

struct Percentiles {
  double p10 = 0.0;
  double p50 = 0.0;
  double p90 = 0.0;
};

struct ResultsTable {
  std::vector<std::string> variants;
  int trials = 0;
  int iterations = 0;
  std::vector<ResultRow> rows;  // sorted by (variant, trial, iteration)
  // aggregates[v][k]: ER percentiles across trials at iteration k + 1
  std::vector<std::vector<Percentiles>> aggregates;
};

/// Linear-interpolated quantile of an unsorted sample, q in [0, 1].
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

/// Per-variant, per-iteration ER percentiles recomputed from rows.
inline std::vector<std::vector<Percentiles>> aggregate_rows(const ResultsTable& t) {
  std::vector<std::vector<std::vector<double>>> er(
      t.variants.size(), std::vector<std::vector<double>>(static_cast<std::size_t>(t.iterations)));
  for (const auto& r : t.rows) er[r.variant][static_cast<std::size_t>(r.iteration - 1)].push_back(r.er_db);
  std::vector<std::vector<Percentiles>> out(t.variants.size());
  for (std::size_t v = 0; v < er.size(); ++v) {
    for (const auto& column : er[v]) {
      if (column.empty()) break;
      out[v].push_back({quantile(column, 0.1), quantile(column, 0.5), quantile(column, 0.9)});
    }
  }
  return out;
}

struct TrialResult {
  JonesVector input_sop;
  LockTrace trace;
};

/// One seeded trial. The input SOP depends only on the seed, so every
/// variant sees the same channel for a given trial index.
inline TrialResult run_trial(const ExperimentConfig& cfg, const AnnealConfig& anneal,
                             std::uint64_t seed) {
  Rng sop_rng = make_stream(seed, Stream::input_sop);
  TrialResult out;
  out.input_sop = random_sop(sop_rng);
  Objective objective = disturbed_objective(
      out.input_sop, cfg.device, make_stream(seed, Stream::noise),
      ChannelDisturbance(cfg.disturbance, make_stream(seed, Stream::disturbance)));
  Rng anneal_rng = make_stream(seed, Stream::anneal);
  out.trace = run_lock(objective, anneal, cfg.device.tps, anneal_rng);
  return out;
}

/// Runs every (variant, trial) pair on up to `threads` workers. Output does
/// not depend on the thread count.
inline ResultsTable run_experiment(const ExperimentConfig& cfg, unsigned threads = 1) {
  cfg.validate();
  ResultsTable table;
  for (const auto& v : cfg.variants) table.variants.push_back(v.name());
  table.trials = cfg.trials;
  table.iterations = cfg.anneal.total_iterations();

  std::vector<AnnealConfig> anneal;
  for (const auto& v : cfg.variants) {
    anneal.push_back(v.apply(cfg.anneal));
    anneal.back().validate(cfg.device.tps);
  }

  const std::size_t jobs = cfg.variants.size() * static_cast<std::size_t>(cfg.trials);
  std::vector<LockTrace> traces(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      const std::size_t v = job / static_cast<std::size_t>(cfg.trials);
      const auto trial = static_cast<std::uint64_t>(job % static_cast<std::size_t>(cfg.trials));
      traces[job] = run_trial(cfg, anneal[v], cfg.base_seed + trial).trace;
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  table.rows.reserve(jobs * static_cast<std::size_t>(table.iterations));
  for (std::size_t job = 0; job < jobs; ++job) {
    const std::size_t v = job / static_cast<std::size_t>(cfg.trials);
    const int trial = static_cast<int>(job % static_cast<std::size_t>(cfg.trials));
    for (const auto& s : traces[job].steps) {
      table.rows.push_back({v, trial, s.iteration, s.temperature, s.step_rad, s.sample.i_px,
                            s.sample.i_py, s.er_db, s.accepted});
    }
  }
  table.aggregates = aggregate_rows(table);
  return table;
}

namespace detail {
inline std::string fmt9(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}
}  // namespace detail

inline constexpr const char* kCsvHeader =
    "variant,trial,iteration,temperature,step_rad,i_px,i_py,er_db,accepted";

inline void write_csv(const ResultsTable& t, std::ostream& os) {
  os << kCsvHeader << '\n';
  for (const auto& r : t.rows) {
    os << t.variants[r.variant] << ',' << r.trial << ',' << r.iteration << ','
       << detail::fmt9(r.temperature) << ',' << detail::fmt9(r.step_rad) << ','
       << detail::fmt9(r.i_px) << ',' << detail::fmt9(r.i_py) << ',' << detail::fmt9(r.er_db)
       << ',' << (r.accepted ? 1 : 0) << '\n';
  }
}

inline void write_aggregate_csv(const ResultsTable& t, std::ostream& os) {
  os << "variant,iteration,er_p10,er_median,er_p90\n";
  for (std::size_t v = 0; v < t.aggregates.size(); ++v) {
    for (std::size_t k = 0; k < t.aggregates[v].size(); ++k) {
      const auto& a = t.aggregates[v][k];
      os << t.variants[v] << ',' << k + 1 << ',' << detail::fmt9(a.p10) << ','
         << detail::fmt9(a.p50) << ',' << detail::fmt9(a.p90) << '\n';
    }
  }
}

struct VariantSummary {
  std::string variant;
  double median_final_er_db = 0.0;
  double median_er_at_100 = 0.0;
  std::optional<int> crossing_25db;  // first iteration where the median reaches 25 dB
  double acceptance_rate = 0.0;
};

inline std::vector<VariantSummary> summarize_variants(const ResultsTable& t) {
  std::vector<std::size_t> counts(t.variants.size(), 0), accepted(t.variants.size(), 0);
  for (const auto& r : t.rows) {
    ++counts[r.variant];
    if (r.accepted) ++accepted[r.variant];
  }
  std::vector<VariantSummary> out;
  for (std::size_t v = 0; v < t.variants.size(); ++v) {
    if (counts[v] == 0 || v >= t.aggregates.size() || t.aggregates[v].empty()) {
      throw std::invalid_argument("summarize: no rows for variant '" + t.variants[v] + "'");
    }
    const auto& curve = t.aggregates[v];
    VariantSummary s;
    s.variant = t.variants[v];
    s.median_final_er_db = curve.back().p50;
    s.median_er_at_100 = curve[std::min<std::size_t>(99, curve.size() - 1)].p50;
    for (std::size_t k = 0; k < curve.size(); ++k) {
      if (curve[k].p50 >= 25.0) {
        s.crossing_25db = static_cast<int>(k + 1);
        break;
      }
    }
    s.acceptance_rate = static_cast<double>(accepted[v]) / static_cast<double>(counts[v]);
    out.push_back(s);
  }
  return out;
}

/// Machine-parsable "key: value" lines, one block per variant.
inline std::string summarize(const ResultsTable& t) {
  std::ostringstream os;
  os << "trials: " << t.trials << '\n' << "iterations: " << t.iterations << '\n';
  for (const auto& s : summarize_variants(t)) {
    const std::string p = "variant." + s.variant + ".";
    os << p << "median_final_er_db: " << detail::fmt9(s.median_final_er_db) << '\n'
       << p << "median_er_at_100: " << detail::fmt9(s.median_er_at_100) << '\n'
       << p << "crossing_25db: "
       << (s.crossing_25db ? std::to_string(*s.crossing_25db) : std::string("none")) << '\n'
       << p << "acceptance_rate: " << detail::fmt9(s.acceptance_rate) << '\n';
  }
  return os.str();
}

}  // namespace polarlock
