#include "phantom/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "phantom/core.hpp"
#include "phantom/error.hpp"

namespace phantom {

void PressProtocol::validate() const {
  if (weight_classes_g.empty()) throw InvariantError("protocol: weight_classes must be non-empty");
  for (std::size_t i = 0; i < weight_classes_g.size(); ++i) {
    if (!(weight_classes_g[i] > 0.0)) throw InvariantError("protocol: weights must be > 0");
    if (i > 0 && !(weight_classes_g[i] > weight_classes_g[i - 1])) {
      throw InvariantError("protocol: weight_classes must be strictly increasing");
    }
  }
  if (!(press_s > 0.0) || !(dwell_s > 0.0) || !(release_s > 0.0)) {
    throw InvariantError("protocol: phase durations must be > 0");
  }
  if (repetitions <= 0) throw InvariantError("protocol: repetitions must be > 0");
  if (!(angle_jitter_deg >= 0.0)) throw InvariantError("protocol: angle jitter must be >= 0");
  if (!(magnitude_jitter >= 0.0 && magnitude_jitter < 1.0)) {
    throw InvariantError("protocol: magnitude jitter must lie in [0, 1)");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvariantError("protocol: train_fraction must lie in (0, 1)");
  }
}

LabeledTrace generate_press(const PressProtocol& protocol, int class_index, int repetition,
                            const SensorModel& sensor, RngStream& rng) {
  protocol.validate();
  sensor.validate();
  if (class_index < 0 || static_cast<std::size_t>(class_index) >= protocol.class_count()) {
    throw InvariantError("generate_press: class index " + std::to_string(class_index) +
                         " out of range");
  }

  const double rate = sensor.sample_rate_hz;
  const auto press_frames = static_cast<std::int64_t>(std::llround(protocol.press_s * rate));
  const auto dwell_frames = static_cast<std::int64_t>(std::llround(protocol.dwell_s * rate));
  const auto release_frames = static_cast<std::int64_t>(std::llround(protocol.release_s * rate));

  // Per-trace contact: magnitude jitter, then tilt away from the normal.
  const double mass_kg = protocol.weight_classes_g[class_index] * 1e-3;
  const double jitter = protocol.magnitude_jitter * (2.0 * rng.uniform() - 1.0);
  const double peak_n = mass_kg * kGravity * (1.0 + jitter);
  const double tilt = rng.normal(0.0, protocol.angle_jitter_deg) * std::numbers::pi / 180.0;
  const double azimuth = 2.0 * std::numbers::pi * rng.uniform();
  const ForceVec direction{std::sin(tilt) * std::cos(azimuth), std::sin(tilt) * std::sin(azimuth),
                           std::cos(tilt)};

  const std::int64_t dwell_begin = press_frames;
  const std::int64_t release_begin = press_frames + dwell_frames;
  const std::int64_t total = release_begin + release_frames;

  auto envelope = [&](std::int64_t i) {
    if (i < dwell_begin) {
      const double phase = static_cast<double>(i) / static_cast<double>(press_frames);
      return 0.5 * (1.0 - std::cos(std::numbers::pi * phase));
    }
    if (i < release_begin) return 1.0;
    const double phase = static_cast<double>(i - release_begin) / static_cast<double>(release_frames);
    return 0.5 * (1.0 + std::cos(std::numbers::pi * phase));
  };

  const ForceProfile profile = [&](double time_s) {
    const auto i = static_cast<std::int64_t>(std::llround(time_s * rate));
    return direction * (peak_n * envelope(i));
  };

  LabeledTrace trace;
  trace.label = class_index;
  trace.repetition = repetition;
  trace.dwell_begin = dwell_begin;
  trace.dwell_end = release_begin;
  trace.frames = sample_trace(sensor, profile, static_cast<double>(total) / rate, rng);
  if (static_cast<std::int64_t>(trace.frames.size()) != total) {
    throw InvariantError("generate_press: frame count does not match the protocol phases");
  }
  return trace;
}

Split stratified_split(const PressProtocol& protocol, const std::vector<LabeledTrace>& traces) {
  RngStream rng(protocol.seed, "datagen/split");
  Split split;
  const auto n_train = static_cast<std::size_t>(
      std::llround(protocol.train_fraction * static_cast<double>(protocol.repetitions)));
  for (std::size_t c = 0; c < protocol.class_count(); ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < traces.size(); ++i) {
      if (traces[i].label == static_cast<int>(c)) members.push_back(i);
    }
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[rng.below(i)]);
    }
    for (std::size_t k = 0; k < members.size(); ++k) {
      (k < n_train ? split.train : split.test).push_back(members[k]);
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<LabeledTrace> attack_traces(const std::vector<LabeledTrace>& traces,
                                        const DatasetAttack& attack, const SensorModel& sensor) {
  attack.coupling.validate();
  std::vector<LabeledTrace> out = traces;
  for (auto& trace : out) {
    if (trace.frames.empty()) continue;
    AttackConfig whole = attack.attack;
    whole.start_frame = trace.frames.front().frame_index;
    whole.end_frame = trace.frames.back().frame_index;
    whole.validate();
    perturb_trace(attack.coupling, whole, sensor, trace.frames);
  }
  return out;
}

Dataset build_dataset(const PressProtocol& protocol, const SensorModel& sensor,
                      const std::optional<DatasetAttack>& attack) {
  protocol.validate();
  sensor.validate();

  Dataset ds;
  ds.protocol = protocol;
  ds.sensor = sensor;
  ds.attack = attack;

  const RngStream root(protocol.seed, "datagen");
  for (std::size_t c = 0; c < protocol.class_count(); ++c) {
    for (int r = 0; r < protocol.repetitions; ++r) {
      RngStream rng = root.substream("c" + std::to_string(c) + "/r" + std::to_string(r));
      ds.traces.push_back(generate_press(protocol, static_cast<int>(c), r, sensor, rng));
    }
  }
  if (attack) ds.traces = attack_traces(ds.traces, *attack, sensor);
  ds.split = stratified_split(protocol, ds.traces);
  return ds;
}

}  // namespace phantom
