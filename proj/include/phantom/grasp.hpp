#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phantom/core.hpp"
#include "phantom/emi.hpp"
#include "phantom/sensor.hpp"

namespace phantom {

/// Discrete PI grip controller with feed-forward of the set point. Gains are per frame.
struct ControllerParams {
  double kp = 0.4;
  double ki = 0.05;
  double integrator_limit_n = 45.0;  // bound on the integral term, newtons
  double max_grip_n = 100.0;
  double ramp_rate_n_per_frame = 0.5;  // actuator slew limit

  void validate() const;
};

struct ControllerState {
  double integral_n = 0.0;
};

struct ControllerOutput {
  double command_n = 0.0;
  ControllerState next;
};

/// e = target - measured; integral = clamp(integral + ki * e, +-limit);
/// command = clamp(target + kp * e + integral, 0, max_grip).
ControllerOutput controller_step(const ControllerParams& params, const ControllerState& state,
                                 double measured_normal_n, double target_n);

struct GraspScenario {
  double object_mass_kg = 1.0;
  double friction_coeff = 0.8;
  double crush_force_n = 80.0;
  double target_normal_n = 35.0;
  ControllerParams controller;
  std::int64_t total_frames = 1000;
  std::optional<AttackConfig> attack;
  std::uint64_t seed = 42;
  // Approach phases before the hold. The set point ramps from zero over
  // `grasp_ramp_frames`; the object's weight then transfers onto the grip over
  // `lift_duration_frames` starting at `lift_start_frame`.
  std::int64_t grasp_ramp_frames = 200;
  std::int64_t lift_start_frame = 200;
  std::int64_t lift_duration_frames = 100;

  void validate() const;
  double weight_n() const { return object_mass_kg * kGravity; }
  /// Grip set point at a frame.
  double setpoint_at(std::int64_t frame) const;
  /// Gravity load the grip must carry at a frame.
  double load_at(std::int64_t frame) const;
};

/// Bit flags; a frame may carry several.
enum GraspEvent : unsigned {
  kEventNone = 0,
  kEventAttackOn = 1u << 0,
  kEventSlip = 1u << 1,
  kEventDrop = 1u << 2,
  kEventCrush = 1u << 3,
};

/// Semicolon-joined tokens in fixed order: attack_on;slip;drop;crush.
std::string format_events(unsigned events);
unsigned parse_events(const std::string& text);

/// Slip run length and latched outcomes carried between frames.
struct EventTracker {
  static constexpr std::int64_t kDropLatencyFrames = 50;

  std::int64_t slip_run = 0;
  bool dropped = false;
  bool crushed = false;
};

struct PhysicalState {
  double applied_grip_n = 0.0;
  double load_n = 0.0;  // weight the grip must hold
  double friction_coeff = 0.8;
  double crush_force_n = 80.0;
};

/// Slip: friction * grip < load this frame. Drop: slip for 50 consecutive
/// frames. Crush: grip >= crush force. Drop and crush latch.
unsigned detect_events(const PhysicalState& state, EventTracker& tracker);

struct SimFrame {
  std::int64_t frame_index = 0;
  double time_s = 0.0;
  double commanded_grip_n = 0.0;  // issued this frame, applied from the next
  ForceVec true_force;            // z is the applied grip, x the carried load
  ForceVec spoofed_reading;
  unsigned events = kEventNone;

  double real_normal_n() const { return true_force.fz; }
  friend bool operator==(const SimFrame&, const SimFrame&) = default;
};

struct SimTrace {
  double sample_rate_hz = 1000.0;
  std::vector<SimFrame> frames;

  /// First frame carrying `event`, or nullopt.
  std::optional<std::int64_t> first_event(GraspEvent event) const;
  /// Reading stream as seen by the controller, for the detector.
  std::vector<SensorFrame> sensor_frames() const;
};

SimTrace run_scenario(const GraspScenario& scenario, const SensorModel& sensor,
                      const CouplingModel& coupling);

}  // namespace phantom
