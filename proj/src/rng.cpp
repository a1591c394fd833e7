#include "phantom/rng.hpp"

#include <cmath>
#include <numbers>

#include "phantom/error.hpp"

namespace phantom {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

RngStream::RngStream(std::uint64_t seed, std::string label)
    : seed_(seed), label_(std::move(label)), key_(splitmix64(seed ^ splitmix64(fnv1a64(label_)))) {}

RngStream RngStream::substream(std::string_view child) const {
  std::string l = label_;
  l += '/';
  l += child;
  return RngStream(seed_, std::move(l));
}

std::uint64_t RngStream::next_u64() {
  // splitmix64 adds the golden-ratio increment itself, so feed it key + n * gamma.
  const std::uint64_t x = key_ + counter_ * 0x9E3779B97F4A7C15ULL;
  ++counter_;
  return splitmix64(x);
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n == 0) throw InvariantError("RngStream::below: n must be positive");
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t r;
  do {
    r = next_u64();
  } while (r >= limit);
  return r % n;
}

double RngStream::normal(double mean, double sigma) {
  if (has_spare_) {
    has_spare_ = false;
    return mean + sigma * spare_normal_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(theta);
  has_spare_ = true;
  return mean + sigma * radius * std::cos(theta);
}

}  // namespace phantom
