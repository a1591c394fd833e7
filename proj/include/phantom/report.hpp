#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "phantom/core.hpp"
#include "phantom/grasp.hpp"

namespace phantom {

/// Mean and population standard deviation with the sample count behind them.
struct Summary {
  double mean = 0.0;
  double std = 0.0;
  std::int64_t count = 0;

  friend bool operator==(const Summary&, const Summary&) = default;
};

Summary summarize(std::span<const double> values);

/// Aligned ground-truth and measured forces of one trace.
struct ForcePairs {
  std::vector<ForceVec> truth;
  std::vector<ForceVec> measured;
};

struct FidelityStats {
  // Per-frame metrics pooled over every trace.
  Summary cosine_frames;
  Summary amplitude_frames;
  // One value per trace: metric of the trace-mean measured vector against the
  // trace-mean true vector. This averages out sensor noise.
  Summary cosine_traces;
  Summary amplitude_traces;
  // Largest per-trace angular deviation, degrees.
  double max_angle_deg = 0.0;
  // Frames whose measured force had no direction (cosine undefined).
  std::int64_t degenerate_frames = 0;

  friend bool operator==(const FidelityStats&, const FidelityStats&) = default;
};

/// Frames whose true force is at or below the degeneracy epsilon are skipped.
FidelityStats force_fidelity(std::span<const ForcePairs> traces);

struct CaseReport {
  std::string label;  // "non-attack", "attack"
  FidelityStats fidelity;
  Summary precision;
  Summary recall;
  std::optional<Summary> f1;  // absent when no repetition had a defined macro F1

  friend bool operator==(const CaseReport&, const CaseReport&) = default;
};

struct Provenance {
  std::string config_hash;
  std::vector<std::uint64_t> seeds;
  std::string tool_version;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct MetricsReport {
  std::vector<CaseReport> cases;
  Provenance provenance;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

nlohmann::json report_to_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& doc);

/// Table laid out case-per-row: Cos. Sim., Amp. Rat., P, R, F1 as mu (sigma).
std::string report_table(const MetricsReport& report);

/// Writes report.txt, report.json and, when a grasp trace is given, plot.csv.
/// Returns the paths written.
std::vector<std::filesystem::path> emit_report(const MetricsReport& report,
                                               const std::filesystem::path& dir,
                                               const SimTrace* trace = nullptr);

}  // namespace phantom
