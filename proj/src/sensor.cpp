#include "phantom/sensor.hpp"

#include <algorithm>
#include <cmath>

#include "phantom/error.hpp"

namespace phantom {

void SensorModel::validate() const {
  if (!(sample_rate_hz > 0.0)) throw InvariantError("sensor: sample_rate must be > 0");
  if (!(noise_sigma_n >= 0.0)) throw InvariantError("sensor: noise_sigma must be >= 0");
  if (!(saturation_n > 0.0)) throw InvariantError("sensor: saturation must be > 0");
  if (!(quantization_n >= 0.0)) throw InvariantError("sensor: quantization_step must be >= 0");
  for (double g : axis_gain) {
    if (!std::isfinite(g)) throw InvariantError("sensor: axis gains must be finite");
  }
}

ForceVec saturate(const SensorModel& model, const ForceVec& f) {
  ForceVec out;
  for (int axis = 0; axis < 3; ++axis) {
    out[axis] = std::clamp(f[axis], -model.saturation_n, model.saturation_n);
  }
  return out;
}

ForceVec transduce(const SensorModel& model, const ForceVec& true_force, RngStream& rng) {
  ForceVec out;
  for (int axis = 0; axis < 3; ++axis) {
    const double noise = rng.normal(0.0, 1.0) * model.noise_sigma_n;
    double v = model.axis_gain[axis] * true_force[axis] + noise;
    v = std::clamp(v, -model.saturation_n, model.saturation_n);
    if (model.quantization_n > 0.0) {
      v = std::round(v / model.quantization_n) * model.quantization_n;
    }
    out[axis] = v;
  }
  return out;
}

std::vector<SensorFrame> sample_trace(const SensorModel& model, const ForceProfile& force_fn,
                                      double duration_s, RngStream& rng) {
  model.validate();
  if (!(duration_s > 0.0)) throw InvariantError("sample_trace: duration must be > 0");
  // Slack keeps durations built as n / rate from losing their last frame to rounding.
  const auto count =
      static_cast<std::int64_t>(std::floor(duration_s * model.sample_rate_hz * (1.0 + 1e-12)));
  if (count < 1) throw InvariantError("sample_trace: duration is shorter than one sample period");

  std::vector<SensorFrame> frames;
  frames.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    SensorFrame f;
    f.frame_index = i;
    f.time_s = frame_time(i, model.sample_rate_hz);
    f.true_force = force_fn(f.time_s);
    f.measured_force = transduce(model, f.true_force, rng);
    frames.push_back(f);
  }
  return frames;
}

}  // namespace phantom
