#include "phantom/core.hpp"

#include <algorithm>
#include <numbers>
#include <string>

#include "phantom/error.hpp"

namespace phantom {

namespace {

void require_nondegenerate(const ForceVec& v, double epsilon, const char* what) {
  const double m = v.magnitude();
  if (!(m > epsilon)) {
    throw DegenerateVectorError(std::string(what) + ": magnitude " + std::to_string(m) +
                                " N is below the degeneracy epsilon");
  }
}

}  // namespace

ForceVec normalized(const ForceVec& v, double epsilon) {
  require_nondegenerate(v, epsilon, "normalized");
  return v * (1.0 / v.magnitude());
}

double cosine_similarity(const ForceVec& a, const ForceVec& b, double epsilon) {
  require_nondegenerate(a, epsilon, "cosine_similarity");
  require_nondegenerate(b, epsilon, "cosine_similarity");
  // sqrt(fl(s*s)) == s in IEEE arithmetic, so cosine_similarity(a, a) is exactly 1.
  const double c = dot(a, b) / std::sqrt(dot(a, a) * dot(b, b));
  return std::clamp(c, -1.0, 1.0);
}

double amplitude_ratio(const ForceVec& gt, const ForceVec& measured, double epsilon) {
  require_nondegenerate(gt, epsilon, "amplitude_ratio");
  return measured.magnitude() / gt.magnitude();
}

double angle_between_deg(const ForceVec& a, const ForceVec& b, double epsilon) {
  return std::acos(cosine_similarity(a, b, epsilon)) * (180.0 / std::numbers::pi);
}

}  // namespace phantom
