#pragma once

#include <array>
#include <filesystem>
#include <random>
#include <string>

#include "ctbot/kinematics.hpp"
#include "oracles/oracles.hpp"

namespace testing_support {

inline ctbot::JointVector random_q(std::mt19937_64& rng, const ctbot::JointLimits& limits) {
  ctbot::JointVector q;
  for (int i = 0; i < ctbot::kNumJoints; ++i) {
    std::uniform_real_distribution<double> d(limits.lower[i], limits.upper[i]);
    q[i] = d(rng);
  }
  return q;
}

inline std::array<double, 7> to_array(const ctbot::JointVector& q) {
  std::array<double, 7> a{};
  for (int i = 0; i < 7; ++i) a[static_cast<std::size_t>(i)] = q[i];
  return a;
}

/// Largest absolute entry difference between a pose and a 4x4 transform.
inline double pose_difference(const ctbot::Pose& p, const Eigen::Matrix4d& t) {
  double err = (p.position - t.block<3, 1>(0, 3)).cwiseAbs().maxCoeff();
  return std::max(err, (p.rotation - t.block<3, 3>(0, 0)).cwiseAbs().maxCoeff());
}

inline std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "ctbot_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace testing_support
