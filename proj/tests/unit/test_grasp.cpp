#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "phantom/error.hpp"
#include "phantom/grasp.hpp"

using namespace phantom;

TEST_CASE("controller at zero error holds the target") {
  ControllerParams p;
  const auto out = controller_step(p, {}, 35.0, 35.0);
  CHECK(out.command_n == 35.0);
  CHECK(out.next.integral_n == 0.0);
}

TEST_CASE("controller proportional arithmetic") {
  ControllerParams p;
  p.kp = 0.5;
  p.ki = 0.0;
  CHECK(controller_step(p, {}, 0.0, 35.0).command_n == doctest::Approx(52.5));
}

TEST_CASE("controller integrator matches a hand recurrence") {
  ControllerParams p;
  p.ki = 0.02;
  ControllerState s;
  double integral = 0.0;
  for (int step = 1; step <= 100; ++step) {
    const auto out = controller_step(p, s, 0.0, 35.0);
    s = out.next;
    integral = std::min(integral + 0.02 * 35.0, p.integrator_limit_n);
    const double expected = std::min(35.0 + p.kp * 35.0 + integral, p.max_grip_n);
    REQUIRE(out.next.integral_n == doctest::Approx(integral).epsilon(1e-12));
    REQUIRE(out.command_n == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(s.integral_n == p.integrator_limit_n);
}

TEST_CASE("controller clamps command into [0, max]") {
  ControllerParams p;
  CHECK(controller_step(p, {}, 500.0, 35.0).command_n == 0.0);
  p.kp = 10.0;
  CHECK(controller_step(p, {}, 0.0, 35.0).command_n == p.max_grip_n);
}

TEST_CASE("slip and crush boundaries") {
  EventTracker t;
  CHECK(detect_events({35.0, 9.81, 0.8, 80.0}, t) == kEventNone);
  EventTracker t2;
  CHECK(detect_events({10.0, 9.81, 0.8, 80.0}, t2) == kEventSlip);
  EventTracker t3;
  CHECK((detect_events({80.0, 9.81, 0.8, 80.0}, t3) & kEventCrush) != 0);
  EventTracker t4;
  CHECK((detect_events({79.999, 9.81, 0.8, 80.0}, t4) & kEventCrush) == 0);
}

TEST_CASE("drop after 50 slipping frames, then latched") {
  EventTracker t;
  unsigned ev = 0;
  for (int i = 0; i < 49; ++i) ev = detect_events({1.0, 9.81, 0.8, 80.0}, t);
  CHECK((ev & kEventDrop) == 0);
  ev = detect_events({1.0, 9.81, 0.8, 80.0}, t);
  CHECK((ev & kEventDrop) != 0);
  ev = detect_events({35.0, 9.81, 0.8, 80.0}, t);
  CHECK((ev & kEventDrop) != 0);
}

TEST_CASE("event tokens round-trip") {
  CHECK(format_events(kEventNone).empty());
  CHECK(format_events(kEventAttackOn | kEventCrush) == "attack_on;crush");
  for (unsigned e = 0; e < 16; ++e) CHECK(parse_events(format_events(e)) == e);
  CHECK_THROWS_AS(parse_events("explode"), ConfigError);
}

namespace {

GraspScenario release_scenario(bool attacked) {
  GraspScenario s;
  if (attacked) {
    AttackConfig a;
    a.emitter_power_w = 1.2;
    a.start_frame = 550;
    a.end_frame = 999;
    s.attack = a;
  }
  return s;
}

CouplingModel suppression() {
  CouplingModel c;
  c.mode = PerturbMode::suppression;
  return c;
}

}  // namespace

TEST_CASE("benign hold settles at the target without events") {
  const SimTrace tr = run_scenario(release_scenario(false), SensorModel{}, suppression());
  REQUIRE(tr.frames.size() == 1000);
  const double bound = 3 * 0.02 * (1 + 0.4);
  for (std::int64_t t = 350; t < 1000; ++t) {
    REQUIRE(std::abs(tr.frames[t].real_normal_n() - 35.0) <= bound);
  }
  for (const auto& f : tr.frames) REQUIRE(f.events == kEventNone);
}

TEST_CASE("phantom release: reading drops, grip stays, crush follows") {
  const SimTrace tr = run_scenario(release_scenario(true), SensorModel{}, suppression());
  CHECK(tr.first_event(kEventAttackOn) == 550);
  double pre = 0;
  for (std::int64_t t = 350; t < 550; ++t) pre += tr.frames[t].real_normal_n() / 200;
  // The actuator lags the command by one frame, so allow a few noise sigmas.
  for (std::int64_t t = 550; t < 1000; ++t) {
    REQUIRE(tr.frames[t].spoofed_reading.magnitude() < 1.0);
    REQUIRE(tr.frames[t].real_normal_n() >= pre - 0.1);
  }
  // Command never falls while the controller believes the grip is lost.
  for (std::int64_t t = 551; t < 1000; ++t) {
    REQUIRE(tr.frames[t].commanded_grip_n >= tr.frames[t - 1].commanded_grip_n);
  }
  const auto crush = tr.first_event(kEventCrush);
  REQUIRE(crush.has_value());
  CHECK(tr.frames[*crush].real_normal_n() >= 80.0);
  CHECK(!tr.first_event(kEventSlip).has_value());
}

TEST_CASE("crush frame matches an independent noise-free recurrence") {
  SensorModel quiet;
  quiet.noise_sigma_n = 0;
  quiet.quantization_n = 0;
  const GraspScenario s = release_scenario(true);
  const SimTrace tr = run_scenario(s, quiet, suppression());

  // Plain re-statement of the loop: slew toward the last command, read zero
  // during the attack, PI update, crush when the applied grip reaches 80 N.
  double applied = 0, command = 0, integral = 0;
  std::int64_t crush = -1;
  for (std::int64_t t = 0; t < 1000 && crush < 0; ++t) {
    applied += std::clamp(command - applied, -0.5, 0.5);
    applied = std::max(applied, 0.0);
    const double reading = (t >= 550) ? 0.0 : applied;
    const double target = 35.0 * std::min(1.0, (t + 1) / 200.0);
    const double e = target - reading;
    integral = std::clamp(integral + 0.05 * e, -45.0, 45.0);
    command = std::clamp(target + 0.4 * e + integral, 0.0, 100.0);
    if (applied >= 80.0) crush = t;
  }
  REQUIRE(crush > 0);
  CHECK(tr.first_event(kEventCrush) == crush);
  // Bound: 45 N of slew at 0.5 N/frame after the 35 N hold, plus integrator fill.
  CHECK(crush - 550 <= static_cast<std::int64_t>(std::ceil((80.0 - 35.0) / 0.5)) + 30);
}

TEST_CASE("scenario determinism and causality") {
  const SimTrace a = run_scenario(release_scenario(true), SensorModel{}, suppression());
  const SimTrace b = run_scenario(release_scenario(true), SensorModel{}, suppression());
  CHECK(a.frames == b.frames);
  // Shortening the run does not change earlier frames.
  GraspScenario shorter = release_scenario(true);
  shorter.total_frames = 600;
  const SimTrace c = run_scenario(shorter, SensorModel{}, suppression());
  for (std::size_t i = 0; i < c.frames.size(); ++i) REQUIRE(c.frames[i] == a.frames[i]);
}

TEST_CASE("scenario validation") {
  GraspScenario s;
  s.total_frames = 0;
  CHECK_THROWS_AS(s.validate(), InvariantError);
  s = GraspScenario{};
  s.friction_coeff = -1;
  CHECK_THROWS_AS(s.validate(), InvariantError);
}
