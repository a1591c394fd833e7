#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "phantom/sensor.hpp"

namespace phantom {

/// Thresholds for the slew/plausibility detector.
struct DetectorConfig {
  double jump_threshold_n = 5.0;     // largest plausible change between frames
  double plausibility_max_n = 100.0;  // largest plausible reading magnitude
  std::int64_t window_frames = 10;    // gap bridged between recurring triggers

  void validate() const;
};

struct DetectionSummary {
  std::optional<std::int64_t> first_flag_frame;
  double flagged_fraction = 0.0;
  std::int64_t flagged_count = 0;
};

struct DetectionResult {
  std::vector<bool> flags;  // one per input frame
  DetectionSummary summary;

  /// Frames observed from `onset_frame` up to and including the first flag at
  /// or after it (a flag on the onset frame itself is latency 1). nullopt when
  /// nothing is flagged from the onset on.
  std::optional<std::int64_t> latency_from(std::int64_t onset_frame,
                                           std::span<const SensorFrame> trace) const;
};

/// A frame triggers when |measured - previous measured| exceeds the jump
/// threshold or |measured| exceeds the plausibility bound. Two triggers at
/// most `window_frames` apart also flag every frame between them.
DetectionResult detect(std::span<const SensorFrame> trace, const DetectorConfig& config);

}  // namespace phantom
