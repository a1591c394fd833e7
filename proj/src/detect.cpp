#include "phantom/detect.hpp"

#include "phantom/error.hpp"

namespace phantom {

void DetectorConfig::validate() const {
  if (!(jump_threshold_n > 0.0) || !(plausibility_max_n > 0.0) || window_frames <= 0) {
    throw InvariantError("detector: thresholds and window must be > 0");
  }
}

DetectionResult detect(std::span<const SensorFrame> trace, const DetectorConfig& config) {
  config.validate();
  if (trace.empty()) throw InvariantError("detect: empty trace");

  DetectionResult result;
  result.flags.assign(trace.size(), false);

  std::optional<std::size_t> last_trigger;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const ForceVec& m = trace[i].measured_force;
    bool trigger = m.magnitude() > config.plausibility_max_n;
    if (i > 0) {
      trigger = trigger || (m - trace[i - 1].measured_force).magnitude() > config.jump_threshold_n;
    }
    if (!trigger) continue;

    result.flags[i] = true;
    if (last_trigger && i - *last_trigger <= static_cast<std::size_t>(config.window_frames)) {
      for (std::size_t j = *last_trigger + 1; j < i; ++j) result.flags[j] = true;
    }
    last_trigger = i;
  }

  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (!result.flags[i]) continue;
    ++result.summary.flagged_count;
    if (!result.summary.first_flag_frame) result.summary.first_flag_frame = trace[i].frame_index;
  }
  result.summary.flagged_fraction =
      static_cast<double>(result.summary.flagged_count) / static_cast<double>(trace.size());
  return result;
}

std::optional<std::int64_t> DetectionResult::latency_from(std::int64_t onset_frame,
                                                          std::span<const SensorFrame> trace) const {
  for (std::size_t i = 0; i < trace.size() && i < flags.size(); ++i) {
    if (trace[i].frame_index >= onset_frame && flags[i]) {
      return trace[i].frame_index - onset_frame + 1;
    }
  }
  return std::nullopt;
}

}  // namespace phantom
