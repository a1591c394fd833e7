#include <doctest.h>

#include "phantom/error.hpp"
#include "phantom/rng.hpp"
#include "phantom/sensor.hpp"

using namespace phantom;

namespace {
SensorModel noiseless() {
  SensorModel m;
  m.noise_sigma_n = 0.0;
  m.quantization_n = 0.0;
  return m;
}
}  // namespace

TEST_CASE("transduce identity chain and clamp") {
  RngStream rng(1, "sensor");
  SensorModel m = noiseless();
  CHECK(transduce(m, {0, 0, 35}, rng) == ForceVec{0, 0, 35});
  m.saturation_n = 50;
  CHECK(transduce(m, {0, 0, 500}, rng) == ForceVec{0, 0, 50});
  CHECK(transduce(m, {-500, 3, 0}, rng) == ForceVec{-50, 3, 0});
}

TEST_CASE("noise mean converges") {
  RngStream rng(42, "sensor/lln");
  SensorModel m;
  m.noise_sigma_n = 0.01;
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) sum += transduce(m, {0, 0, 1.0}, rng).fz;
  // sigma / sqrt(n) = 1e-4, so 0.001 is ten standard errors.
  CHECK(std::abs(sum / 10000 - 1.0) <= 0.001);
}

TEST_CASE("quantization rounds to the step and output stays within saturation") {
  RngStream rng(9, "sensor/q");
  SensorModel m;
  m.noise_sigma_n = 5.0;
  m.saturation_n = 10.0;
  for (int i = 0; i < 2000; ++i) {
    const ForceVec f = transduce(m, {rng.normal(0, 20), rng.normal(0, 20), rng.normal(0, 20)}, rng);
    for (int a = 0; a < 3; ++a) {
      REQUIRE(std::abs(f[a]) <= 10.0);
      const double steps = f[a] / 0.001;
      REQUIRE(std::abs(steps - std::round(steps)) < 1e-6);
    }
  }
}

TEST_CASE("noiseless identity within saturation") {
  RngStream rng(2, "sensor/id");
  const SensorModel m = noiseless();
  for (int i = 0; i < 1000; ++i) {
    const ForceVec f{rng.normal(0, 30), rng.normal(0, 30), rng.normal(0, 30)};
    if (std::abs(f.fx) > 100 || std::abs(f.fy) > 100 || std::abs(f.fz) > 100) continue;
    REQUIRE(transduce(m, f, rng) == f);
  }
}

TEST_CASE("sample_trace frame count, constant and ramp profiles") {
  RngStream rng(3, "sensor/trace");
  SensorModel m;
  CHECK(sample_trace(m, [](double) { return ForceVec{0, 0, 1}; }, 1.0, rng).size() == 1000);

  const SensorModel quiet = noiseless();
  const auto constant = sample_trace(quiet, [](double) { return ForceVec{1, 2, 3}; }, 0.5, rng);
  for (const auto& f : constant) CHECK(f.measured_force == ForceVec{1, 2, 3});

  SensorModel slow = noiseless();
  slow.sample_rate_hz = 100;
  const auto ramp = sample_trace(slow, [](double t) { return ForceVec{0, 0, 10 * t}; }, 1.0, rng);
  CHECK(ramp.size() == 100);
  CHECK(ramp[50].frame_index == 50);
  CHECK(ramp[50].measured_force.fz == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("sample_trace determinism and validation") {
  SensorModel m;
  auto profile = [](double t) { return ForceVec{0.1, 0, 2 + t}; };
  RngStream a(11, "t"), b(11, "t");
  CHECK(sample_trace(m, profile, 0.3, a) == sample_trace(m, profile, 0.3, b));
  RngStream c(11, "t");
  CHECK_THROWS_AS(sample_trace(m, profile, 0.0, c), InvariantError);
  SensorModel bad;
  bad.sample_rate_hz = 0;
  CHECK_THROWS_AS(bad.validate(), InvariantError);
  bad = SensorModel{};
  bad.noise_sigma_n = -1;
  CHECK_THROWS_AS(bad.validate(), InvariantError);
}
