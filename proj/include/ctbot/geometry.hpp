#pragma once

#include <Eigen/Core>

namespace ctbot {

struct Capsule {
  Eigen::Vector3d a = Eigen::Vector3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  double radius = 0.0;
};

/// Minimum distance between closed segments [p1, p2] and [p3, p4]. Zero-length
/// segments degrade to points.
double segment_segment_distance(const Eigen::Vector3d& p1, const Eigen::Vector3d& p2, const Eigen::Vector3d& p3,
                                const Eigen::Vector3d& p4);

double point_segment_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& a, const Eigen::Vector3d& b);

/// Distance from a point to an axis-aligned box centered at the origin; zero inside.
double point_box_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& half_extents);

/// Distance from a segment to an origin-centered axis-aligned box.
double segment_box_distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& half_extents);

/// (r1 + r2) − axis distance; positive means the capsules overlap.
double capsule_penetration(const Capsule& c1, const Capsule& c2);

}  // namespace ctbot
