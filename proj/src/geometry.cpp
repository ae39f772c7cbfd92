#include "ctbot/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace ctbot {

double point_segment_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const Eigen::Vector3d ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + t * ab - p).norm();
}

// Closest points of two segments, after Ericson, "Real-Time Collision Detection" (ClosestPtSegmentSegment).
double segment_segment_distance(const Eigen::Vector3d& p1, const Eigen::Vector3d& p2, const Eigen::Vector3d& p3,
                                const Eigen::Vector3d& p4) {
  constexpr double kEps = 1e-18;
  const Eigen::Vector3d d1 = p2 - p1;
  const Eigen::Vector3d d2 = p4 - p3;
  const Eigen::Vector3d r = p1 - p3;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);

  double s = 0.0;
  double t = 0.0;
  if (a <= kEps && e <= kEps) return r.norm();
  if (a <= kEps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= kEps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > kEps * a * e ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p1 + s * d1) - (p3 + t * d2)).norm();
}

double point_box_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& half_extents) {
  const Eigen::Vector3d outside = (p.cwiseAbs() - half_extents).cwiseMax(0.0);
  return outside.norm();
}

double segment_box_distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& half_extents) {
  // Distance to a convex set is convex along the segment: golden-section search.
  constexpr double kInvPhi = 0.6180339887498949;
  auto f = [&](double t) { return point_box_distance(a + t * (b - a), half_extents); };
  double lo = 0.0, hi = 1.0;
  double x1 = hi - kInvPhi * (hi - lo), x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < 80 && hi - lo > 1e-12; ++i) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = f(x2);
    }
  }
  return std::min({f(0.0), f(1.0), f(0.5 * (lo + hi))});
}

double capsule_penetration(const Capsule& c1, const Capsule& c2) {
  return c1.radius + c2.radius - segment_segment_distance(c1.a, c1.b, c2.a, c2.b);
}

}  // namespace ctbot
