#pragma once

#include <algorithm>
#include <cmath>

namespace kss {

/// Overlaps with min(1 - r, 1 + r) below this are treated as singular.
inline constexpr double kSingularOverlapMargin = 1e-12;

/// An inner product r = x.y of two unit vectors, carried together with
/// accurately computed 1 - r and 1 + r.
///
/// Near r = +-1 almost every two-point formula divides a small quantity by
/// another small quantity. Building the overlap from an angle (r = cos theta)
/// keeps 1 - r = 2 sin^2(theta/2) at full relative precision, which is what
/// lets the cosine-substituted quadrature get arbitrarily close to the poles.
struct Overlap {
  double r = 0.0;
  double one_minus = 1.0;
  double one_plus = 1.0;

  static Overlap from_value(double r) { return {r, 1.0 - r, 1.0 + r}; }

  static Overlap from_angle(double theta) {
    const double s = std::sin(0.5 * theta);
    const double c = std::cos(0.5 * theta);
    return {std::cos(theta), 2.0 * s * s, 2.0 * c * c};
  }

  // 1 - r^2
  double one_minus_sq() const { return one_minus * one_plus; }
  double pole_distance() const { return std::min(one_minus, one_plus); }
  bool singular() const { return !(pole_distance() >= kSingularOverlapMargin); }
};

/// Throws SingularOverlapError naming `where` if the overlap is singular.
void require_regular(const Overlap& overlap, const char* where);

}  // namespace kss
