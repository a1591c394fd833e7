#include "phantom/grasp.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "phantom/error.hpp"
#include "phantom/rng.hpp"

namespace phantom {

void ControllerParams::validate() const {
  if (!(kp >= 0.0) || !(ki >= 0.0)) throw InvariantError("controller: kp and ki must be >= 0");
  if (!(integrator_limit_n >= 0.0)) throw InvariantError("controller: integrator_limit must be >= 0");
  if (!(max_grip_n > 0.0)) throw InvariantError("controller: max_grip_force must be > 0");
  if (!(ramp_rate_n_per_frame > 0.0)) throw InvariantError("controller: ramp_rate must be > 0");
}

ControllerOutput controller_step(const ControllerParams& params, const ControllerState& state,
                                 double measured_normal_n, double target_n) {
  const double error = target_n - measured_normal_n;
  ControllerOutput out;
  out.next.integral_n = std::clamp(state.integral_n + params.ki * error,
                                   -params.integrator_limit_n, params.integrator_limit_n);
  out.command_n =
      std::clamp(target_n + params.kp * error + out.next.integral_n, 0.0, params.max_grip_n);
  return out;
}

void GraspScenario::validate() const {
  controller.validate();
  if (!(object_mass_kg > 0.0)) throw InvariantError("scenario: object_mass must be > 0");
  if (!(friction_coeff > 0.0)) throw InvariantError("scenario: friction_coeff must be > 0");
  if (!(target_normal_n > 0.0)) throw InvariantError("scenario: target_normal_force must be > 0");
  if (!(crush_force_n > target_normal_n)) {
    throw InvariantError("scenario: crush_force must exceed target_normal_force");
  }
  if (total_frames <= 0) throw InvariantError("scenario: total_frames must be > 0");
  if (grasp_ramp_frames < 0 || lift_start_frame < 0 || lift_duration_frames < 0) {
    throw InvariantError("scenario: phase lengths must be >= 0");
  }
  if (attack) attack->validate();
}

double GraspScenario::setpoint_at(std::int64_t frame) const {
  if (frame + 1 >= grasp_ramp_frames) return target_normal_n;
  return target_normal_n * static_cast<double>(frame + 1) / static_cast<double>(grasp_ramp_frames);
}

double GraspScenario::load_at(std::int64_t frame) const {
  if (frame < lift_start_frame) return 0.0;
  if (frame >= lift_start_frame + lift_duration_frames) return weight_n();
  return weight_n() * static_cast<double>(frame - lift_start_frame + 1) /
         static_cast<double>(lift_duration_frames + 1);
}

namespace {

constexpr std::array<std::pair<GraspEvent, const char*>, 4> kEventTokens{{
    {kEventAttackOn, "attack_on"},
    {kEventSlip, "slip"},
    {kEventDrop, "drop"},
    {kEventCrush, "crush"},
}};

}  // namespace

std::string format_events(unsigned events) {
  std::string out;
  for (const auto& [flag, token] : kEventTokens) {
    if (events & flag) {
      if (!out.empty()) out += ';';
      out += token;
    }
  }
  return out;
}

unsigned parse_events(const std::string& text) {
  unsigned events = kEventNone;
  std::istringstream in(text);
  std::string token;
  while (std::getline(in, token, ';')) {
    if (token.empty()) continue;
    bool known = false;
    for (const auto& [flag, name] : kEventTokens) {
      if (token == name) {
        events |= flag;
        known = true;
      }
    }
    if (!known) throw ConfigError("unknown event token '" + token + "'");
  }
  return events;
}

unsigned detect_events(const PhysicalState& state, EventTracker& tracker) {
  unsigned events = kEventNone;
  if (state.friction_coeff * state.applied_grip_n < state.load_n) {
    events |= kEventSlip;
    ++tracker.slip_run;
  } else {
    tracker.slip_run = 0;
  }
  if (tracker.slip_run >= EventTracker::kDropLatencyFrames) tracker.dropped = true;
  if (state.applied_grip_n >= state.crush_force_n) tracker.crushed = true;
  if (tracker.dropped) events |= kEventDrop;
  if (tracker.crushed) events |= kEventCrush;
  return events;
}

std::optional<std::int64_t> SimTrace::first_event(GraspEvent event) const {
  for (const auto& f : frames) {
    if (f.events & event) return f.frame_index;
  }
  return std::nullopt;
}

std::vector<SensorFrame> SimTrace::sensor_frames() const {
  std::vector<SensorFrame> out;
  out.reserve(frames.size());
  for (const auto& f : frames) {
    out.push_back({f.frame_index, f.time_s, f.true_force, f.spoofed_reading});
  }
  return out;
}

SimTrace run_scenario(const GraspScenario& scenario, const SensorModel& sensor,
                      const CouplingModel& coupling) {
  scenario.validate();
  sensor.validate();
  if (scenario.attack) coupling.validate();

  RngStream noise(scenario.seed, "grasp/sensor");
  const ControllerParams& ctl = scenario.controller;

  SimTrace trace;
  trace.sample_rate_hz = sensor.sample_rate_hz;
  trace.frames.reserve(static_cast<std::size_t>(scenario.total_frames));

  ControllerState state;
  EventTracker tracker;
  double applied = 0.0;
  double command = 0.0;

  for (std::int64_t t = 0; t < scenario.total_frames; ++t) {
    // (1) actuator follows the previous command under its slew limit
    applied += std::clamp(command - applied, -ctl.ramp_rate_n_per_frame, ctl.ramp_rate_n_per_frame);
    applied = std::max(applied, 0.0);

    // (2) contact: friction carries the load up to mu * N
    const double load = scenario.load_at(t);
    SensorFrame frame;
    frame.frame_index = t;
    frame.time_s = frame_time(t, sensor.sample_rate_hz);
    frame.true_force = ForceVec{std::min(load, scenario.friction_coeff * applied), 0.0, applied};

    // (3) transduce, (4) inject
    frame.measured_force = transduce(sensor, frame.true_force, noise);
    bool attack_on = false;
    if (scenario.attack) {
      attack_on = scenario.attack->active_at(t);
      frame.measured_force = perturb(coupling, *scenario.attack, sensor, frame);
    }

    // (5) controller reacts to the possibly spoofed normal reading
    const auto out = controller_step(ctl, state, frame.measured_force.fz, scenario.setpoint_at(t));
    state = out.next;
    command = out.command_n;

    // (6) events
    unsigned events = detect_events(
        {applied, load, scenario.friction_coeff, scenario.crush_force_n}, tracker);
    if (attack_on) events |= kEventAttackOn;

    trace.frames.push_back(
        {t, frame.time_s, command, frame.true_force, frame.measured_force, events});
  }
  return trace;
}

}  // namespace phantom
