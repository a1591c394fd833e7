#pragma once

#include <cmath>

namespace phantom {

/// Standard gravity, m/s^2.
inline constexpr double kGravity = 9.81;

/// Below this magnitude (newtons) a force has no usable direction.
inline constexpr double kDegenerateEpsilon = 1e-9;

/// 3-axis contact force in newtons. z is the sensor normal.
struct ForceVec {
  double fx = 0.0;
  double fy = 0.0;
  double fz = 0.0;

  constexpr ForceVec() = default;
  constexpr ForceVec(double x, double y, double z) : fx(x), fy(y), fz(z) {}

  double magnitude() const { return std::sqrt(fx * fx + fy * fy + fz * fz); }
  bool finite() const { return std::isfinite(fx) && std::isfinite(fy) && std::isfinite(fz); }

  constexpr double operator[](int axis) const { return axis == 0 ? fx : (axis == 1 ? fy : fz); }
  constexpr double& operator[](int axis) { return axis == 0 ? fx : (axis == 1 ? fy : fz); }

  constexpr ForceVec& operator+=(const ForceVec& o) {
    fx += o.fx;
    fy += o.fy;
    fz += o.fz;
    return *this;
  }
  constexpr ForceVec& operator-=(const ForceVec& o) {
    fx -= o.fx;
    fy -= o.fy;
    fz -= o.fz;
    return *this;
  }
  constexpr ForceVec& operator*=(double k) {
    fx *= k;
    fy *= k;
    fz *= k;
    return *this;
  }

  friend constexpr ForceVec operator+(ForceVec a, const ForceVec& b) { return a += b; }
  friend constexpr ForceVec operator-(ForceVec a, const ForceVec& b) { return a -= b; }
  friend constexpr ForceVec operator*(ForceVec a, double k) { return a *= k; }
  friend constexpr ForceVec operator*(double k, ForceVec a) { return a *= k; }
  friend constexpr bool operator==(const ForceVec&, const ForceVec&) = default;
};

constexpr double dot(const ForceVec& a, const ForceVec& b) {
  return a.fx * b.fx + a.fy * b.fy + a.fz * b.fz;
}

/// Unit vector along `v`. Throws DegenerateVectorError for near-zero input.
ForceVec normalized(const ForceVec& v, double epsilon = kDegenerateEpsilon);

/// Normalised dot product, clamped into [-1, 1].
double cosine_similarity(const ForceVec& a, const ForceVec& b, double epsilon = kDegenerateEpsilon);

/// |measured| / |gt|. Only the ground truth must be non-degenerate.
double amplitude_ratio(const ForceVec& gt, const ForceVec& measured,
                       double epsilon = kDegenerateEpsilon);

/// Angle between two forces in degrees, in [0, 180].
double angle_between_deg(const ForceVec& a, const ForceVec& b, double epsilon = kDegenerateEpsilon);

}  // namespace phantom
