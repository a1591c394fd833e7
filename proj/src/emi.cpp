#include "phantom/emi.hpp"

#include <cmath>
#include <string>

#include "phantom/error.hpp"

namespace phantom {

const char* to_string(PerturbMode mode) {
  switch (mode) {
    case PerturbMode::additive_offset: return "additive_offset";
    case PerturbMode::channel_gain: return "channel_gain";
    case PerturbMode::suppression: return "suppression";
  }
  return "unknown";
}

PerturbMode parse_perturb_mode(const std::string& text) {
  if (text == "additive_offset") return PerturbMode::additive_offset;
  if (text == "channel_gain") return PerturbMode::channel_gain;
  if (text == "suppression") return PerturbMode::suppression;
  throw ConfigError("unknown perturbation mode '" + text + "'");
}

void CouplingModel::validate() const {
  if (!(resonant_freq_hz > 0.0)) throw InvariantError("coupling: resonant_freq must be > 0");
  if (!(quality_factor > 0.0)) throw InvariantError("coupling: quality_factor must be > 0");
  if (!(peak_gain_n_per_w >= 0.0)) throw InvariantError("coupling: peak_gain must be >= 0");
  if (!(path_loss_exponent >= 0.0)) throw InvariantError("coupling: path_loss_exponent must be >= 0");
  if (!(reference_distance_m > 0.0)) throw InvariantError("coupling: reference_distance must be > 0");
  if (!direction.finite() || std::abs(direction.magnitude() - 1.0) > 1e-9) {
    throw InvariantError("coupling: direction must be a unit vector");
  }
  if (!std::isfinite(offset_n_per_unit)) throw InvariantError("coupling: offset must be finite");
}

bool Envelope::is_on(std::int64_t frames_since_start) const {
  if (kind == EnvelopeKind::constant) return true;
  const std::int64_t phase = frames_since_start % period_frames;
  return static_cast<double>(phase) < duty * static_cast<double>(period_frames);
}

void AttackConfig::validate() const {
  if (!(carrier_freq_hz > 0.0)) throw InvariantError("attack: carrier_freq must be > 0");
  if (!(emitter_power_w >= 0.0)) throw InvariantError("attack: emitter_power must be >= 0");
  if (!(standoff_distance_m > 0.0)) throw InvariantError("attack: standoff_distance must be > 0");
  if (start_frame < 0 || start_frame > end_frame) {
    throw InvariantError("attack: need 0 <= start_frame <= end_frame");
  }
  if (envelope.kind == EnvelopeKind::on_off_keyed) {
    if (envelope.period_frames <= 0) throw InvariantError("attack: OOK period must be > 0");
    if (!(envelope.duty >= 0.0 && envelope.duty <= 1.0)) {
      throw InvariantError("attack: OOK duty must lie in [0, 1]");
    }
  }
}

bool AttackConfig::active_at(std::int64_t frame_index) const {
  if (frame_index < start_frame || frame_index > end_frame) return false;
  return envelope.is_on(frame_index - start_frame);
}

double lorentzian(double freq_hz, double resonant_freq_hz, double quality_factor) {
  const double detune = freq_hz / resonant_freq_hz - resonant_freq_hz / freq_hz;
  return 1.0 / (1.0 + quality_factor * quality_factor * detune * detune);
}

double coupling_gain(const CouplingModel& model, double freq_hz, double distance_m) {
  if (!(freq_hz > 0.0) || !(distance_m > 0.0)) {
    throw InvariantError("coupling_gain: frequency and distance must be > 0");
  }
  const double resonance = lorentzian(freq_hz, model.resonant_freq_hz, model.quality_factor);
  const double decay = std::pow(model.reference_distance_m / distance_m, model.path_loss_exponent);
  return model.peak_gain_n_per_w * resonance * decay;
}

double coupling_amplitude(const CouplingModel& model, const AttackConfig& attack) {
  return coupling_gain(model, attack.carrier_freq_hz, attack.standoff_distance_m) *
         attack.emitter_power_w;
}

namespace {

ForceVec apply_coupling(const CouplingModel& model, double amplitude, const ForceVec& measured) {
  ForceVec out = measured;
  switch (model.mode) {
    case PerturbMode::additive_offset:
      out += amplitude * model.direction;
      break;
    case PerturbMode::channel_gain:
      for (int axis = 0; axis < 3; ++axis) {
        out[axis] *= 1.0 + amplitude * std::abs(model.direction[axis]);
      }
      break;
    case PerturbMode::suppression:
      out *= std::max(0.0, 1.0 - amplitude);
      break;
  }
  if (model.offset_n_per_unit != 0.0) {
    out += (amplitude * model.offset_n_per_unit) * model.direction;
  }
  return out;
}

}  // namespace

ForceVec perturb(const CouplingModel& model, const AttackConfig& attack, const SensorModel& sensor,
                 const SensorFrame& frame) {
  if (!attack.active_at(frame.frame_index)) return frame.measured_force;
  const double amplitude = coupling_amplitude(model, attack);
  if (amplitude == 0.0) return frame.measured_force;
  return saturate(sensor, apply_coupling(model, amplitude, frame.measured_force));
}

void perturb_trace(const CouplingModel& model, const AttackConfig& attack,
                   const SensorModel& sensor, std::vector<SensorFrame>& frames) {
  for (auto& f : frames) f.measured_force = perturb(model, attack, sensor, f);
}

SweepResult frequency_sweep(const CouplingModel& model, const SensorModel& sensor,
                            const SweepRequest& request) {
  model.validate();
  if (!std::isfinite(request.start_hz) || !std::isfinite(request.end_hz) ||
      !(request.start_hz < request.end_hz) || !(request.step_hz > 0.0) ||
      !(request.start_hz > 0.0)) {
    throw InvariantError("frequency_sweep: invalid range, the sweep contains no points");
  }
  if (!(request.probe_power_w > 0.0)) {
    throw InvariantError("frequency_sweep: probe power must be > 0");
  }

  // Fixed benign reference: a steady press exciting every axis.
  constexpr int kReferenceFrames = 16;
  std::vector<SensorFrame> reference(kReferenceFrames);
  for (int i = 0; i < kReferenceFrames; ++i) {
    reference[i].frame_index = i;
    reference[i].time_s = frame_time(i, sensor.sample_rate_hz);
    reference[i].true_force = ForceVec{0.5, 0.5, 1.0};
    reference[i].measured_force = reference[i].true_force;
  }

  // Relative slack absorbs rounding when the band is an exact multiple of the step.
  const double span_steps = (request.end_hz - request.start_hz) / request.step_hz;
  const auto count = static_cast<std::int64_t>(std::floor(span_steps * (1.0 + 1e-12))) + 1;

  SweepResult result;
  result.curve.reserve(static_cast<std::size_t>(count));
  double best_gain = -1.0;
  for (std::int64_t i = 0; i < count; ++i) {
    const double freq = request.start_hz + static_cast<double>(i) * request.step_hz;
    AttackConfig probe;
    probe.carrier_freq_hz = freq;
    probe.emitter_power_w = request.probe_power_w;
    probe.standoff_distance_m = request.probe_distance_m;
    probe.start_frame = 0;
    probe.end_frame = kReferenceFrames - 1;

    double response = 0.0;
    for (const auto& frame : reference) {
      response += (perturb(model, probe, sensor, frame) - frame.measured_force).magnitude();
    }
    response /= kReferenceFrames * request.probe_power_w;
    result.curve.push_back({freq, response});
    if (response > best_gain) {  // strict: ties keep the lower frequency
      best_gain = response;
      result.best_freq_hz = freq;
    }
  }
  return result;
}

}  // namespace phantom
