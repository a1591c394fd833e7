#pragma once

#include <cstdint>
#include <vector>

#include "phantom/core.hpp"
#include "phantom/sensor.hpp"

namespace phantom {

enum class PerturbMode {
  additive_offset,  // measured + A * direction
  channel_gain,     // per-axis scaling by (1 + A * |direction_axis|)
  suppression,      // measured * max(0, 1 - A)
};

const char* to_string(PerturbMode mode);
PerturbMode parse_perturb_mode(const std::string& text);

/// Resonant coupling between the emitter and the sensor electronics.
///
/// The resonance is a Lorentzian L(f) = 1 / (1 + Q^2 (f/f0 - f0/f)^2) scaled by
/// `peak_gain` (N/W at the reference distance) and a near-field power law in
/// distance. The induced signal projects onto `direction`.
struct CouplingModel {
  double resonant_freq_hz = 313e6;
  double quality_factor = 40.0;
  double peak_gain_n_per_w = 1.0;
  double path_loss_exponent = 3.0;
  double reference_distance_m = 0.005;
  ForceVec direction{0.0, 0.0, 1.0};
  PerturbMode mode = PerturbMode::additive_offset;
  /// Extra additive offset, newtons per unit coupling amplitude, applied along
  /// `direction` on top of channel_gain. Zero for a single-effect model.
  double offset_n_per_unit = 0.0;

  void validate() const;
};

enum class EnvelopeKind { constant, on_off_keyed };

struct Envelope {
  EnvelopeKind kind = EnvelopeKind::constant;
  std::int64_t period_frames = 1;
  double duty = 1.0;  // fraction of each period the carrier is on

  /// Envelope state at `frames_since_start` frames after the attack start.
  bool is_on(std::int64_t frames_since_start) const;
};

/// Emitter settings and schedule. The attack window is inclusive on both ends.
struct AttackConfig {
  double carrier_freq_hz = 313e6;
  double emitter_power_w = 0.0;
  double standoff_distance_m = 0.005;
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;
  Envelope envelope;

  void validate() const;
  /// True when the emitter radiates at this frame.
  bool active_at(std::int64_t frame_index) const;
};

/// Lorentzian resonance factor, 1 at the resonant frequency.
double lorentzian(double freq_hz, double resonant_freq_hz, double quality_factor);

/// N/W coupled at `freq_hz` from `distance_m`.
double coupling_gain(const CouplingModel& model, double freq_hz, double distance_m);

/// Dimensionless (or newton, for additive modes) coupling amplitude A that the
/// attack produces: coupling_gain(carrier, standoff) * power.
double coupling_amplitude(const CouplingModel& model, const AttackConfig& attack);

/// Perturbed reading for one frame. Frames outside the schedule or with the
/// envelope off come back bit-identical. The result is re-clamped to the
/// sensor saturation.
ForceVec perturb(const CouplingModel& model, const AttackConfig& attack, const SensorModel& sensor,
                 const SensorFrame& frame);

/// Applies `perturb` to every frame of a trace in place.
void perturb_trace(const CouplingModel& model, const AttackConfig& attack,
                   const SensorModel& sensor, std::vector<SensorFrame>& frames);

struct SweepPoint {
  double freq_hz = 0.0;
  double gain = 0.0;  // mean perturbation magnitude per probe watt
};

struct SweepRequest {
  double start_hz = 100e6;
  double end_hz = 400e6;
  double step_hz = 1e6;
  double probe_distance_m = 0.005;
  /// Kept small so suppression-mode responses stay in their linear region.
  double probe_power_w = 1e-3;
};

struct SweepResult {
  double best_freq_hz = 0.0;
  std::vector<SweepPoint> curve;
};

/// Steps the carrier over [start, end] and measures the perturbation response
/// against a fixed benign reference trace. The maximum wins, ties go to the
/// lower frequency.
SweepResult frequency_sweep(const CouplingModel& model, const SensorModel& sensor,
                            const SweepRequest& request);

}  // namespace phantom
