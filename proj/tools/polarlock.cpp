// polarlock: batch runner for the polarization-locking simulator.
//
//   polarlock run      [--config PATH] [--out PATH] [--trials N] [--seed N]
//   polarlock sweep    [--config PATH] --key KEY --values V1,V2,... [--out PATH]
//   polarlock oracle   [--config PATH] (--sop ex_re,ex_im,ey_re,ey_im | --seed N)
//   polarlock validate
//
// Exit codes: 0 success, 1 usage/config/I-O error, 2 self-check failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "polarlock/polarlock.hpp"

namespace {

using namespace polarlock;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitCheck = 2;

unsigned thread_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("POLARLOCK_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
    } catch (const std::exception&) {
      std::cerr << "warning: ignoring POLARLOCK_THREADS='" << env << "'\n";
    }
  }
  return n;
}

std::string with_suffix(const std::string& csv_path, const std::string& suffix) {
  std::filesystem::path p(csv_path);
  const std::string stem = (p.parent_path() / p.stem()).string();
  return stem + suffix;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write output file '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("failed writing output file '" + path + "'");
}

/// Writes rows, aggregates and summary next to `csv_path`; returns the summary.
std::string emit(const ResultsTable& table, const std::string& csv_path) {
  std::ostringstream rows, agg;
  write_csv(table, rows);
  write_aggregate_csv(table, agg);
  const std::string summary = summarize(table);
  write_file(csv_path, rows.str());
  write_file(with_suffix(csv_path, "_aggregate.csv"), agg.str());
  write_file(with_suffix(csv_path, "_summary.txt"), summary);
  return summary;
}

ExperimentConfig load_or_default(const std::string& path) {
  return path.empty() ? ExperimentConfig{} : load_config(path);
}

JonesVector parse_sop(const std::string& text) {
  std::vector<double> v;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) v.push_back(std::stod(item));
  if (v.size() != 4) throw std::invalid_argument("--sop expects ex_re,ex_im,ey_re,ey_im");
  return JonesVector{{v[0], v[1]}, {v[2], v[3]}}.normalized();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polarization-locking simulator: annealing controller, oracle and batch runner"};
  app.require_subcommand(1);

  std::string config_path, out_path, sweep_key, sweep_values, sop_text;
  int trials = 0;
  long long seed = -1;

  auto* run = app.add_subcommand("run", "Run the configured experiment; write CSV and summary");
  run->add_option("--config", config_path, "Configuration file");
  run->add_option("--out", out_path, "Output CSV path (overrides experiment.output)");
  run->add_option("--trials", trials, "Trial count override")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Base seed override")->check(CLI::NonNegativeNumber);

  auto* sweep = app.add_subcommand("sweep", "Repeat the experiment for each value of one key");
  sweep->add_option("--config", config_path, "Configuration file");
  sweep->add_option("--out", out_path, "Output CSV path stem");
  sweep->add_option("--key", sweep_key, "Configuration key, e.g. noise_sigma")->required();
  sweep->add_option("--values", sweep_values, "Comma-separated values")->required();
  sweep->add_option("--trials", trials, "Trial count override")->check(CLI::PositiveNumber);
  sweep->add_option("--seed", seed, "Base seed override")->check(CLI::NonNegativeNumber);

  auto* oracle = app.add_subcommand("oracle", "Brute-force best LO intensity for one input SOP");
  oracle->add_option("--config", config_path, "Configuration file (device section)");
  auto* sop_opt = oracle->add_option("--sop", sop_text, "Input Jones vector ex_re,ex_im,ey_re,ey_im");
  oracle->add_option("--seed", seed, "Draw a random input SOP from this seed")
      ->check(CLI::NonNegativeNumber)
      ->excludes(sop_opt);

  auto* validate = app.add_subcommand("validate", "Run the algebraic identity self-check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitConfig;
  }

  try {
    if (*validate) {
      bool ok = true;
      for (const auto& c : identity_suite()) {
        std::printf("%s: %s max_error=%.3g tol=%.3g\n", c.name.c_str(), c.passed() ? "pass" : "FAIL",
                    c.max_error, c.tolerance);
        ok = ok && c.passed();
      }
      return ok ? kExitOk : kExitCheck;
    }

    ExperimentConfig cfg = load_or_default(config_path);
    if (trials > 0) cfg.trials = trials;
    if (seed >= 0) cfg.base_seed = static_cast<std::uint64_t>(seed);
    if (!out_path.empty()) cfg.output_path = out_path;

    if (*run) {
      const ResultsTable table = run_experiment(cfg, thread_count());
      std::cout << emit(table, cfg.output_path);
      return kExitOk;
    }

    if (*sweep) {
      const std::string key = resolve_key(sweep_key);
      const std::string short_key = key.substr(key.find('.') + 1);
      for (const auto& value : detail::split(sweep_values, ',')) {
        ExperimentConfig c = cfg;
        set_config_value(c, key, value);
        try {
          c.validate();
        } catch (const std::invalid_argument& e) {
          throw ConfigError(key, e.what());
        }
        const std::string path = with_suffix(cfg.output_path, "_" + short_key + "_" + value + ".csv");
        const ResultsTable table = run_experiment(c, thread_count());
        std::cout << "sweep." << key << ": " << value << '\n'
                  << "output: " << path << '\n'
                  << emit(table, path);
      }
      return kExitOk;
    }

    if (*oracle) {
      JonesVector sop;
      if (!sop_text.empty()) {
        sop = parse_sop(sop_text);
      } else {
        Rng rng = make_stream(static_cast<std::uint64_t>(std::max(seed, 0LL)), Stream::input_sop);
        sop = random_sop(rng);
      }
      const OracleResult best = oracle_best(sop, cfg.device);
      std::printf("intensity: %.12g\n", best.intensity);
      for (std::size_t k = 0; k < 4; ++k) std::printf("theta%zu: %.9g\n", k + 1, best.phases[k]);
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
