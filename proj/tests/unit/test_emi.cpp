#include <doctest.h>

#include <cmath>
#include <cstring>

#include "phantom/emi.hpp"
#include "phantom/error.hpp"
#include "phantom/rng.hpp"

using namespace phantom;

namespace {
SensorFrame frame_at(std::int64_t i, ForceVec measured) {
  SensorFrame f;
  f.frame_index = i;
  f.true_force = measured;
  f.measured_force = measured;
  return f;
}
}  // namespace

TEST_CASE("lorentzian reference values") {
  CHECK(lorentzian(313e6, 313e6, 40) == 1.0);
  CHECK(lorentzian(1.01 * 100e6, 100e6, 50) ==
        doctest::Approx(0.502481374299612093).epsilon(1e-12));
  CHECK(lorentzian(1.0, 313e6, 40) < 1e-12);
  CHECK(lorentzian(1e15, 313e6, 40) < 1e-12);
}

TEST_CASE("coupling gain at resonance and reference distance equals peak gain") {
  CouplingModel m;
  m.peak_gain_n_per_w = 3.5;
  CHECK(coupling_gain(m, m.resonant_freq_hz, m.reference_distance_m) == 3.5);
}

TEST_CASE("coupling gain decays with distance and is maximal at resonance") {
  CouplingModel m;
  double prev = coupling_gain(m, m.resonant_freq_hz, 0.001);
  for (double d = 0.002; d < 0.05; d += 0.001) {
    const double g = coupling_gain(m, m.resonant_freq_hz, d);
    REQUIRE(g < prev);
    prev = g;
  }
  const double peak = coupling_gain(m, m.resonant_freq_hz, 0.005);
  for (double f = 100e6; f <= 400e6; f += 1e6) {
    if (f == m.resonant_freq_hz) continue;
    REQUIRE(coupling_gain(m, f, 0.005) < peak);
  }
}

TEST_CASE("zero power leaves frames bit-identical") {
  RngStream rng(5, "emi/zero");
  SensorModel sensor;
  for (PerturbMode mode : {PerturbMode::additive_offset, PerturbMode::channel_gain,
                           PerturbMode::suppression}) {
    CouplingModel m;
    m.mode = mode;
    m.offset_n_per_unit = 3.0;
    AttackConfig a;
    a.emitter_power_w = 0.0;
    a.end_frame = 1000;
    for (int i = 0; i < 1000; ++i) {
      const SensorFrame f = frame_at(i, {rng.normal(0, 200), rng.normal(0, 200), rng.normal(0, 200)});
      const ForceVec out = perturb(m, a, sensor, f);
      REQUIRE(std::memcmp(&out, &f.measured_force, sizeof(ForceVec)) == 0);
    }
  }
}

TEST_CASE("suppression at amplitude >= 1 zeroes the reading") {
  CouplingModel m;
  m.mode = PerturbMode::suppression;
  AttackConfig a;
  a.emitter_power_w = 1.0;
  a.end_frame = 10;
  CHECK(perturb(m, a, SensorModel{}, frame_at(3, {0, 0, 35})) == ForceVec{0, 0, 0});
  a.emitter_power_w = 0.25;
  CHECK(perturb(m, a, SensorModel{}, frame_at(3, {0, 0, 40})).fz == doctest::Approx(30.0));
}

TEST_CASE("additive offset and channel gain") {
  SensorModel sensor;
  CouplingModel m;
  m.direction = normalized({1, 1, 0});
  AttackConfig a;
  a.emitter_power_w = 2.0;
  a.end_frame = 5;
  const ForceVec add = perturb(m, a, sensor, frame_at(0, {0, 0, 1}));
  CHECK(add.fx == doctest::Approx(std::sqrt(2.0)));
  CHECK(add.fz == 1.0);

  m.mode = PerturbMode::channel_gain;
  m.direction = {0, 0, 1};
  const ForceVec g = perturb(m, a, sensor, frame_at(0, {1, 1, 1}));
  CHECK(g == ForceVec{1, 1, 3});
  m.offset_n_per_unit = 0.5;
  const ForceVec go = perturb(m, a, sensor, frame_at(0, {1, 1, 1}));
  CHECK(go.fz == doctest::Approx(4.0));
}

TEST_CASE("perturbation re-clamps to saturation") {
  CouplingModel m;
  m.mode = PerturbMode::channel_gain;
  AttackConfig a;
  a.emitter_power_w = 100.0;
  a.end_frame = 5;
  CHECK(perturb(m, a, SensorModel{}, frame_at(0, {0, 0, 50})).fz == 100.0);
}

TEST_CASE("schedule: frames outside the window or with the envelope off are untouched") {
  CouplingModel m;
  AttackConfig a;
  a.emitter_power_w = 1.0;
  a.start_frame = 10;
  a.end_frame = 20;
  a.envelope.kind = EnvelopeKind::on_off_keyed;
  a.envelope.period_frames = 4;
  a.envelope.duty = 0.5;
  const SensorModel sensor;
  for (int i = 0; i < 40; ++i) {
    const SensorFrame f = frame_at(i, {0.1, 0.2, 0.3});
    const bool expect_on = i >= 10 && i <= 20 && ((i - 10) % 4) < 2;
    CHECK(a.active_at(i) == expect_on);
    CHECK((perturb(m, a, sensor, f) != f.measured_force) == expect_on);
  }
}

TEST_CASE("sweep finds the configured resonance") {
  CouplingModel m;
  const SensorModel sensor;
  CHECK(frequency_sweep(m, sensor, SweepRequest{}).best_freq_hz == 313e6);
  m.resonant_freq_hz = 250.5e6;
  const double best = frequency_sweep(m, sensor, SweepRequest{}).best_freq_hz;
  CHECK((best == 250e6 || best == 251e6));

  // Dense evaluation of the gain curve as an independent oracle.
  double dense_best = 0, dense_gain = -1;
  for (double f = 100e6; f <= 400e6; f += 1e5) {
    const double g = lorentzian(f, 250.5e6, m.quality_factor);
    if (g > dense_gain) dense_gain = g, dense_best = f;
  }
  CHECK(std::abs(best - dense_best) <= 1e6);
}

TEST_CASE("sweep within one step for random resonances and Q >= 10") {
  RngStream rng(17, "emi/sweep");
  const SensorModel sensor;
  for (int i = 0; i < 20; ++i) {
    CouplingModel m;
    m.resonant_freq_hz = 100e6 + rng.uniform() * 300e6;
    m.quality_factor = 10 + rng.uniform() * 90;
    for (PerturbMode mode : {PerturbMode::additive_offset, PerturbMode::channel_gain,
                             PerturbMode::suppression}) {
      m.mode = mode;
      const auto r = frequency_sweep(m, sensor, SweepRequest{});
      REQUIRE(std::abs(r.best_freq_hz - m.resonant_freq_hz) <= 1e6);
    }
  }
}

TEST_CASE("sweep curve shape and edge cases") {
  CouplingModel m;
  const SensorModel sensor;
  const auto r = frequency_sweep(m, sensor, SweepRequest{});
  CHECK(r.curve.size() == 301);
  CHECK(r.curve.front().freq_hz == 100e6);
  CHECK(r.curve.back().freq_hz == 400e6);

  SweepRequest single;
  single.step_hz = 1e9;
  const auto one = frequency_sweep(m, sensor, single);
  CHECK(one.curve.size() == 1);
  CHECK(one.best_freq_hz == 100e6);

  SweepRequest bad;
  bad.end_hz = bad.start_hz;
  CHECK_THROWS_AS(frequency_sweep(m, sensor, bad), InvariantError);
  bad = SweepRequest{};
  bad.step_hz = 0;
  CHECK_THROWS_AS(frequency_sweep(m, sensor, bad), InvariantError);
}

TEST_CASE("perturb mode names round-trip") {
  for (PerturbMode mode : {PerturbMode::additive_offset, PerturbMode::channel_gain,
                           PerturbMode::suppression}) {
    CHECK(parse_perturb_mode(to_string(mode)) == mode);
  }
  CHECK_THROWS_AS(parse_perturb_mode("amplify"), ConfigError);
}
