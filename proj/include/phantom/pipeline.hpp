#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phantom/config.hpp"
#include "phantom/datagen.hpp"
#include "phantom/learn.hpp"
#include "phantom/report.hpp"

namespace phantom {

inline constexpr const char* kToolVersion = "0.1.0";

/// Dwell-window (true, measured) pairs of the selected traces.
std::vector<ForcePairs> dwell_pairs(const std::vector<LabeledTrace>& traces,
                                    const std::vector<std::size_t>& selection);

/// One benign-train / benign-and-attacked-test pass. The attacked half only
/// runs when the config's profile couples a nonzero amplitude.
struct ExperimentRun {
  std::uint64_t seed = 0;
  Dataset dataset;  // benign
  Forest forest;
  Evaluation benign;
  std::vector<ForcePairs> benign_pairs;  // test split, dwell frames
  std::optional<Evaluation> attack;
  std::vector<ForcePairs> attack_pairs;
};

/// The dataset's attack profile, taken from the config when both coupling and
/// attack sections are present.
std::optional<DatasetAttack> attack_profile(const ExperimentConfig& cfg);

ExperimentRun run_experiment_once(const ExperimentConfig& cfg, std::uint64_t seed);

/// Seeds used for report repetitions: seed, seed + 1, ...
std::vector<std::uint64_t> repetition_seeds(std::uint64_t seed, int repetitions);

/// Combines repetitions into the report: fidelity over the test traces of
/// every repetition, P/R/F1 as mean and std of the per-repetition macro values.
MetricsReport build_report(const std::vector<ExperimentRun>& runs, const std::string& config_hash);

MetricsReport run_experiment(const ExperimentConfig& cfg);

struct CalibrationResult {
  double emitter_power_w = 0.0;
  double offset_n_per_unit = 0.0;
  double amplitude = 0.0;  // coupling amplitude A at the calibrated power
  double achieved_amplitude_ratio = 0.0;
  double achieved_cosine = 0.0;
  int evaluations = 0;
};

/// Searches emitter power and offset so the attacked benign training traces
/// hit the configured amplitude ratio and cosine targets (per-trace dwell
/// means). Requires channel_gain coupling and an attack section. Throws
/// InvariantError when the targets cannot be reached with the configured
/// coupling direction.
CalibrationResult calibrate(const ExperimentConfig& cfg);

/// `cfg` with the calibrated power and offset written in.
ExperimentConfig apply_calibration(const ExperimentConfig& cfg, const CalibrationResult& result);

/// Config file text for the calibrated profile, with a comment header.
std::string calibrated_profile_text(const ExperimentConfig& calibrated,
                                    const CalibrationResult& result);

}  // namespace phantom
