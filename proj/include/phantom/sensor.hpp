#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "phantom/core.hpp"
#include "phantom/rng.hpp"

namespace phantom {

/// Force-level model of the Hall-effect fingertip sensor. Magnetics are not
/// modelled: a true force goes in, a noisy, clamped, quantised reading comes out.
struct SensorModel {
  double sample_rate_hz = 1000.0;
  double noise_sigma_n = 0.02;      // per axis
  double saturation_n = 100.0;      // symmetric per-axis clamp
  double quantization_n = 0.001;    // 0 disables rounding
  std::array<double, 3> axis_gain{1.0, 1.0, 1.0};

  /// Throws InvariantError when a field is out of range.
  void validate() const;
  double period_s() const { return 1.0 / sample_rate_hz; }
};

/// One timestamped sample pairing ground truth with the sensor reading.
struct SensorFrame {
  std::int64_t frame_index = 0;
  double time_s = 0.0;
  ForceVec true_force;
  ForceVec measured_force;

  friend bool operator==(const SensorFrame&, const SensorFrame&) = default;
};

inline double frame_time(std::int64_t frame_index, double sample_rate_hz) {
  return static_cast<double>(frame_index) / sample_rate_hz;
}

/// Per axis: gain * F + N(0, sigma), clamp to +-saturation, round to the
/// quantisation step. Always consumes three normal draws so streams stay
/// aligned regardless of the noise level.
ForceVec transduce(const SensorModel& model, const ForceVec& true_force, RngStream& rng);

/// Clamp each axis into +-saturation.
ForceVec saturate(const SensorModel& model, const ForceVec& f);

using ForceProfile = std::function<ForceVec(double time_s)>;

/// floor(duration * rate) frames; frame i samples the profile at i / rate.
std::vector<SensorFrame> sample_trace(const SensorModel& model, const ForceProfile& force_fn,
                                      double duration_s, RngStream& rng);

}  // namespace phantom
