#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "phantom/datagen.hpp"
#include "phantom/detect.hpp"
#include "phantom/emi.hpp"
#include "phantom/grasp.hpp"
#include "phantom/learn.hpp"
#include "phantom/sensor.hpp"

namespace phantom {

struct CalibrationTargets {
  double amplitude_ratio = 9.2;
  double cosine_similarity = 0.56;
};

/// Everything an experiment needs. Sections missing from the file keep their
/// defaults; `coupling` and `attack` are only present when the file has them.
///
/// File format: INI-style sections of `key = value` lines, `#` or `;` comments,
/// lists as comma-separated values. Unknown sections or keys are errors.
struct ExperimentConfig {
  std::uint64_t seed = 42;
  SensorModel sensor;
  PressProtocol protocol;
  WindowSpec window;
  ForestParams forest;
  std::optional<CouplingModel> coupling;
  std::optional<AttackConfig> attack;
  GraspScenario scenario;
  DetectorConfig detector;
  SweepRequest sweep;
  CalibrationTargets calibration;
  int report_repetitions = 5;

  /// Deterministic serialisation of every value, in a fixed key order.
  std::string canonical_text() const;
  /// SHA-256 of canonical_text(), lowercase hex.
  std::string hash() const;

  /// Applies a seed to every seeded component.
  void set_seed(std::uint64_t s);
  /// Scenario with the configured attack attached (if any).
  GraspScenario scenario_with_attack() const;
};

ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<memory>");
ExperimentConfig load_config(const std::filesystem::path& path);

std::string sha256_hex(const std::string& bytes);

}  // namespace phantom
