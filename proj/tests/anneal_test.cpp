#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "polarlock/anneal.hpp"

using namespace polarlock;

namespace {

const TpsParams kTps{};

LockTrace lock(const JonesVector& sop, const DeviceParams& dev, const AnnealConfig& cfg,
               std::uint64_t seed) {
  Objective obj = device_objective(sop, dev, make_stream(seed, Stream::noise));
  Rng rng = make_stream(seed, Stream::anneal);
  return run_lock(obj, cfg, dev.tps, rng);
}

}  // namespace

TEST(StepSchedule, VariableBrackets) {
  const StepSchedule s = StepSchedule::variable();
  EXPECT_EQ(step_for_gap(0.5, s), 0.16);
  EXPECT_EQ(step_for_gap(0.05, s), 0.08);
  EXPECT_EQ(step_for_gap(0.005, s), 0.03);
  EXPECT_EQ(step_for_gap(0.0005, s), 0.008);
}

TEST(StepSchedule, BracketEdgesAreUpperInclusive) {
  const StepSchedule s = StepSchedule::variable();
  EXPECT_EQ(s.step_for_gap(1.0), 0.16);
  EXPECT_EQ(s.step_for_gap(0.1), 0.08);
  EXPECT_EQ(s.step_for_gap(0.01), 0.03);
  EXPECT_EQ(s.step_for_gap(0.001), 0.008);
  EXPECT_EQ(s.step_for_gap(0.0), 0.008);
}

TEST(StepSchedule, GapIsClamped) {
  const StepSchedule s = StepSchedule::variable();
  EXPECT_EQ(s.step_for_gap(-0.3), 0.008);
  EXPECT_EQ(s.step_for_gap(2.0), 0.16);
}

TEST(StepSchedule, StepNeverGrowsAsGapShrinks) {
  const StepSchedule s = StepSchedule::variable();
  double prev = s.step_for_gap(1.0);
  for (double gap = 1.0; gap >= 0.0; gap -= 1e-5) {
    const double st = s.step_for_gap(gap);
    ASSERT_LE(st, prev);
    prev = st;
  }
}

TEST(StepSchedule, RejectsNonMonotoneTables) {
  EXPECT_THROW(StepSchedule({{1.0, 0.1}, {0.1, 0.2}}), std::invalid_argument);
  EXPECT_THROW(StepSchedule({{0.1, 0.2}, {1.0, 0.1}}), std::invalid_argument);
  EXPECT_THROW(StepSchedule({{1.0, 0.2}, {0.1, 0.0}}), std::invalid_argument);
  EXPECT_THROW(StepSchedule(std::vector<StepSchedule::Bracket>{}), std::invalid_argument);
  EXPECT_NO_THROW(StepSchedule::fixed(0.0));
}

TEST(Propose, PiecewiseBranches) {
  const double top = 3.0 * kPi;
  EXPECT_DOUBLE_EQ(propose_component(0.0, 0.16, 0.5, -1, top), 0.08);
  EXPECT_DOUBLE_EQ(propose_component(top, 0.16, 1.0, +1, top), top - 0.16);
  EXPECT_DOUBLE_EQ(propose_component(kPi, 0.08, 0.25, -1, top), kPi - 0.02);
  EXPECT_DOUBLE_EQ(propose_component(kPi, 0.08, 0.25, +1, top), kPi + 0.02);
}

TEST(Propose, ResultsStayInsideSpanAndBoundariesPointInward) {
  const double top = 3.0 * kPi;
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> pick(0, 2);
  std::uniform_real_distribution<double> interior(0.0, top);
  for (int i = 0; i < 20000; ++i) {
    PhaseQuad p;
    for (std::size_t k = 0; k < 4; ++k) {
      const int where = pick(rng);
      p[k] = where == 0 ? 0.0 : where == 1 ? top : interior(rng);
    }
    const double st = i % 2 ? 0.16 : 0.008;
    const PhaseQuad q = propose(p, st, rng, top);
    for (std::size_t k = 0; k < 4; ++k) {
      ASSERT_GE(q[k], 0.0);
      ASSERT_LE(q[k], top);
      ASSERT_LE(std::abs(q[k] - p[k]), st + 1e-15);
      if (p[k] == 0.0) {
        ASSERT_GE(q[k], p[k]);
      }
      if (p[k] == top) {
        ASSERT_LE(q[k], p[k]);
      }
    }
  }
}

TEST(Accept, ImprovementsAlwaysAccepted) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) ASSERT_TRUE(accept(0.5 + 1e-9 * i, 0.5, 1e-5, rng));
  EXPECT_TRUE(accept(0.5, 0.5, 1e-9, rng));
}

TEST(Accept, MetropolisRateAtOneTemperatureDeficit) {
  std::mt19937_64 rng(2);
  int hits = 0;
  constexpr int n = 100000;
  for (int i = 0; i < n; ++i) hits += accept(0.5 - 1e-5, 0.5, 1e-5, rng);
  EXPECT_NEAR(static_cast<double>(hits) / n, std::exp(-1.0), 0.01);
}

TEST(Accept, DeepRejection) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100000; ++i) ASSERT_FALSE(accept(0.0, 1.0, 1e-5, rng));
}

TEST(VoltageDomain, StepAtMaximumVoltage) {
  EXPECT_NEAR(voltage_domain_step(0.008, kTps), 4.78e-3, 5e-6);
  EXPECT_NEAR(voltage_domain_step(0.16, kTps), 95.6e-3, 5e-5);
  EXPECT_EQ(voltage_domain_step(0.0, kTps), 0.0);
  EXPECT_NEAR(voltage_step_to_phase_step(voltage_domain_step(0.03, kTps), kTps), 0.03, 1e-15);
}

TEST(RunLock, TraceShapeAndTemperatureSchedule) {
  const AnnealConfig cfg;
  const LockTrace t = lock(random_sop(std::uint64_t{1}), DeviceParams{}, cfg, 1);
  ASSERT_EQ(t.steps.size(), 500u);
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    EXPECT_EQ(t.steps[i].iteration, static_cast<int>(i) + 1);
    const int k = static_cast<int>(i) / cfg.n0;
    double expected = cfg.t0;
    for (int j = 0; j < k; ++j) expected *= cfg.cooling_p;
    ASSERT_EQ(t.steps[i].temperature, expected);
    ASSERT_NEAR(t.steps[i].temperature, cfg.t0 * std::pow(cfg.cooling_p, k), 1e-20);
  }
  EXPECT_EQ(t.initial_phases, PhaseQuad::filled(1.5 * kPi));
}

TEST(RunLock, BestSoFarIsMonotoneAndTraceable) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const LockTrace t = lock(random_sop(seed), DeviceParams{}, AnnealConfig{}, seed);
    ASSERT_EQ(t.relock_count, 0);
    double prev = t.initial_sample.i_px;
    double prev_step = 1.0;
    for (const auto& s : t.steps) {
      ASSERT_GE(s.best_intensity, prev);
      ASSERT_LE(s.step_rad, prev_step);
      prev = s.best_intensity;
      prev_step = s.step_rad;
    }
    ASSERT_EQ(t.best_intensity, prev);
    if (t.best_iteration > 0) {
      const auto& row = t.steps[static_cast<std::size_t>(t.best_iteration - 1)];
      EXPECT_EQ(row.sample.i_px, t.best_intensity);
      EXPECT_EQ(row.proposal, t.best_phases);
      EXPECT_TRUE(row.accepted);
    } else {
      EXPECT_EQ(t.best_phases, t.initial_phases);
    }
  }
}

TEST(RunLock, BestPhasesReproduceBestIntensity) {
  const DeviceParams dev;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const JonesVector sop = random_sop(seed);
    const LockTrace t = lock(sop, dev, AnnealConfig{}, seed);
    const double replay = ideal_ports(sop, t.best_phases, dev).i_px;
    EXPECT_GE(replay, t.best_intensity - 6.0 * dev.noise_sigma) << seed;
  }
}

TEST(RunLock, SeededDeterminism) {
  const JonesVector sop = random_sop(std::uint64_t{8});
  const LockTrace a = lock(sop, DeviceParams{}, AnnealConfig{}, 8);
  const LockTrace b = lock(sop, DeviceParams{}, AnnealConfig{}, 8);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    ASSERT_EQ(a.steps[i].sample, b.steps[i].sample);
    ASSERT_EQ(a.steps[i].proposal, b.steps[i].proposal);
    ASSERT_EQ(a.steps[i].accepted, b.steps[i].accepted);
  }
  EXPECT_EQ(a.best_phases, b.best_phases);
}

TEST(RunLock, NoiselessIdealDeviceConverges) {
  int good = 0;
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const LockTrace t = lock(random_sop(seed), DeviceParams::ideal(), AnnealConfig{}, seed);
    good += t.best_intensity >= 0.999;
  }
  EXPECT_GE(good, 19);
}

TEST(RunLock, AlreadyLockedInputStaysLocked) {
  const DeviceParams dev = DeviceParams::noiseless();
  const AnnealConfig cfg;
  const PhaseQuad start = PhaseQuad::filled(cfg.initial_phase(dev.tps));
  // Input that the initial phases route entirely to the x port.
  const JonesVector sop = dpc_transform(start).adjoint() * JonesVector{1.0, 0.0};
  const LockTrace t = lock(sop, dev, cfg, 5);
  const double er0 = measured_er_db(t.initial_sample, dev);
  EXPECT_NEAR(er0, 28.0, 1e-9);
  // the leak floor keeps the gap above 1e-3, so proposals wander by 0.03 rad
  EXPECT_NEAR(t.best_intensity, t.initial_sample.i_px, 1e-12);
  for (const auto& s : t.steps) ASSERT_GT(s.er_db, 20.0) << s.iteration;
}

TEST(RunLockFixed, ZeroStepFreezesTrace) {
  const DeviceParams dev = DeviceParams::noiseless();
  Objective obj = device_objective(random_sop(std::uint64_t{3}), dev, make_stream(3, Stream::noise));
  Rng rng = make_stream(3, Stream::anneal);
  const LockTrace t = run_lock_fixed(obj, AnnealConfig{}, 0.0, dev.tps, rng);
  for (const auto& s : t.steps) {
    ASSERT_EQ(s.proposal, t.initial_phases);
    ASSERT_EQ(s.sample, t.initial_sample);
    ASSERT_EQ(s.step_rad, 0.0);
  }
}

TEST(RunLockFixed, UsesConstantStep) {
  Objective obj = device_objective(random_sop(std::uint64_t{4}), DeviceParams{}, make_stream(4, Stream::noise));
  Rng rng = make_stream(4, Stream::anneal);
  const LockTrace t = run_lock_fixed(obj, AnnealConfig{}, 0.16, kTps, rng);
  for (const auto& s : t.steps) ASSERT_EQ(s.step_rad, 0.16);
}

TEST(RunLockVoltage, ProposalsStayInActuatorRange) {
  AnnealConfig cfg;
  cfg.mode = SteppingMode::voltage;
  const double lo = voltage_to_phase(0.0, kTps), hi = voltage_to_phase(kTps.v_max, kTps);
  int good = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const LockTrace t = lock(random_sop(seed), DeviceParams{}, cfg, seed);
    ASSERT_TRUE(t.best_voltages.has_value());
    for (const auto& s : t.steps) {
      for (std::size_t k = 0; k < 4; ++k) {
        ASSERT_GE(s.proposal[k], lo - 1e-12);
        ASSERT_LE(s.proposal[k], hi + 1e-12);
      }
    }
    for (std::size_t k = 0; k < 4; ++k)
      EXPECT_NEAR(voltage_to_phase((*t.best_voltages)[k], kTps), t.best_phases[k], 1e-12);
    good += t.best_intensity > 0.99;
  }
  EXPECT_GE(good, 18);
}

TEST(RunLockVoltage, FixedVoltageStepReportsEquivalentPhaseStep) {
  AnnealConfig cfg;
  cfg.mode = SteppingMode::voltage;
  Objective obj = device_objective(random_sop(std::uint64_t{2}), DeviceParams{}, make_stream(2, Stream::noise));
  Rng rng = make_stream(2, Stream::anneal);
  const LockTrace t = run_lock_fixed(obj, cfg, 0.005, kTps, rng);
  EXPECT_NEAR(t.steps.front().step_rad, 0.008, 0.0005);
}

TEST(AnnealConfig, Validation) {
  AnnealConfig cfg;
  EXPECT_NO_THROW(cfg.validate(kTps));
  cfg.cooling_p = 1.0;
  EXPECT_THROW(cfg.validate(kTps), std::invalid_argument);
  cfg = AnnealConfig{};
  cfg.m0 = 0;
  EXPECT_THROW(cfg.validate(kTps), std::invalid_argument);
  cfg = AnnealConfig{};
  cfg.init_phase = 20.0;
  EXPECT_THROW(cfg.validate(kTps), std::invalid_argument);
  cfg = AnnealConfig{};
  cfg.t0 = 0.0;
  EXPECT_THROW(cfg.validate(kTps), std::invalid_argument);
}
