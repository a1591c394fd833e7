#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "phantom/emi.hpp"
#include "phantom/rng.hpp"
#include "phantom/sensor.hpp"

namespace phantom {

/// Calibration-weight press protocol: ramp on, dwell, ramp off.
struct PressProtocol {
  std::vector<double> weight_classes_g{50.0, 100.0, 200.0, 500.0, 1000.0};
  double press_s = 0.3;
  double dwell_s = 1.0;
  double release_s = 0.3;
  int repetitions = 40;
  double angle_jitter_deg = 2.0;   // std of the contact tilt
  double magnitude_jitter = 0.01;  // dwell force is m*g*(1+u), |u| <= this
  double train_fraction = 0.7;
  std::uint64_t seed = 42;

  void validate() const;
  std::size_t class_count() const { return weight_classes_g.size(); }
};

struct LabeledTrace {
  int label = 0;      // index into weight_classes_g
  int repetition = 0;
  std::int64_t dwell_begin = 0;  // first dwell frame
  std::int64_t dwell_end = 0;    // one past the last dwell frame
  std::vector<SensorFrame> frames;

  friend bool operator==(const LabeledTrace&, const LabeledTrace&) = default;
};

struct DatasetAttack {
  CouplingModel coupling;
  AttackConfig attack;
};

/// Stratified split of trace indices.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;

  friend bool operator==(const Split&, const Split&) = default;
};

struct Dataset {
  PressProtocol protocol;
  SensorModel sensor;
  std::optional<DatasetAttack> attack;
  std::vector<LabeledTrace> traces;  // ordered by (label, repetition)
  Split split;
};

/// One press of weight class `class_index`. The rng is the trace's own substream.
LabeledTrace generate_press(const PressProtocol& protocol, int class_index, int repetition,
                            const SensorModel& sensor, RngStream& rng);

/// Every class x repetition, each on the substream "datagen/c<class>/r<rep>" of
/// the protocol seed. An attack, when given, covers every frame of every trace.
Dataset build_dataset(const PressProtocol& protocol, const SensorModel& sensor,
                      const std::optional<DatasetAttack>& attack = std::nullopt);

/// Seeded per-class shuffle; the first round(train_fraction * reps) go to train.
Split stratified_split(const PressProtocol& protocol, const std::vector<LabeledTrace>& traces);

/// Copy of `traces` with the attack applied over each whole trace.
std::vector<LabeledTrace> attack_traces(const std::vector<LabeledTrace>& traces,
                                        const DatasetAttack& attack, const SensorModel& sensor);

}  // namespace phantom
