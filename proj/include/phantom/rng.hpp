#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace phantom {

/// Labelled, reproducible random stream.
///
/// Algorithm: the stream key is splitmix64(seed ^ splitmix64(fnv1a64(label))).
/// Draw n returns splitmix64(key + n * 0x9E3779B97F4A7C15), so the sequence is a
/// pure function of (seed, label, n) and identical on every platform. Uniform
/// doubles use the top 53 bits; normals use the Box-Muller transform with both
/// outputs consumed in order.
///
/// Instances are single-owner. Derive a child stream per independent task with
/// `substream` instead of sharing one stream across tasks.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string label);

  std::uint64_t seed() const { return seed_; }
  const std::string& label() const { return label_; }

  /// Independent stream keyed by "<label>/<child>".
  RngStream substream(std::string_view child) const;

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform();
  /// Uniform integer on [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  double normal(double mean = 0.0, double sigma = 1.0);

 private:
  std::uint64_t seed_;
  std::string label_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace phantom
