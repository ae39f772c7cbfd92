#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace ctbot {

inline constexpr int kNumJoints = 7;
/// Frames 1..7 carry a joint; frame 8 is the needle-tip tool frame.
inline constexpr int kNumFrames = 8;
inline constexpr int kToolFrame = 8;

using JointVector = Eigen::Matrix<double, kNumJoints, 1>;
using Twist = Eigen::Matrix<double, 6, 1>;
using Jacobian = Eigen::Matrix<double, 6, kNumJoints>;

enum class JointType { prismatic, revolute, fixed };

/// One modified-DH row. The joint variable is added to `d_offset` for a
/// prismatic row and to `theta_offset` for a revolute row.
struct DhRow {
  JointType type = JointType::fixed;
  double a = 0.0;
  double alpha = 0.0;
  double d_offset = 0.0;
  double theta_offset = 0.0;
};

/// Eight rows: seven actuated frames followed by the fixed tool frame.
class DhTable {
 public:
  explicit DhTable(std::vector<DhRow> rows);

  const DhRow& row(int frame) const { return rows_.at(static_cast<std::size_t>(frame - 1)); }
  const std::vector<DhRow>& rows() const noexcept { return rows_; }

 private:
  std::vector<DhRow> rows_;
};

struct JointLimits {
  JointVector lower;
  JointVector upper;

  bool contains(const JointVector& q) const;
  JointVector clamp(const JointVector& q) const;
  /// 1-based index of the first joint outside its interval.
  std::optional<int> first_violation(const JointVector& q) const;
  /// Throws LimitViolation naming the first offending joint.
  void require(const JointVector& q) const;
};

/// Rigid transform: `position` in meters, `rotation` maps child axes into the parent frame.
struct Pose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();

  static Pose identity() { return {}; }

  Pose operator*(const Pose& child) const {
    return {position + rotation * child.position, rotation * child.rotation};
  }
  Eigen::Vector3d transform_point(const Eigen::Vector3d& p) const { return position + rotation * p; }
  Pose inverse() const {
    const Eigen::Matrix3d rt = rotation.transpose();
    return {-(rt * position), rt};
  }
  /// ‖RᵀR − I‖∞ (max absolute entry).
  double orthonormality_error() const;
};

/// DH table plus the joint limits it is operated within.
struct SerialChain {
  DhTable dh;
  JointLimits limits;
};

struct IkParams {
  double damping = 0.1;
  int max_iterations = 200;
  double position_tol = 1e-4;
  double orientation_tol = 1e-3;
  double step_clamp = 0.1;
  double nullspace_gain = 0.0;

  void validate() const;
};

struct IkResult {
  JointVector q;
  double position_residual = 0.0;
  double orientation_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Gradient of a secondary joint-space objective, evaluated at q. The IK
/// moves along its nullspace projection (ascent direction).
using NullspaceObjective = std::function<JointVector(const JointVector&)>;

Eigen::Matrix3d rot_x(double angle);
Eigen::Matrix3d rot_y(double angle);
Eigen::Matrix3d rot_z(double angle);

/// Axis-angle vector (log map) of a rotation matrix.
Eigen::Vector3d rotation_log(const Eigen::Matrix3d& r);

/// Transform from frame n to frame n+1 for the joint value q:
/// rotation Rx(alpha)·Rz(theta), origin a·x_n + d·z_{n+1} in the parent frame.
Pose dh_transform(const DhRow& row, double q);

/// Pose of `frame` (1..8) in the base frame.
Pose forward_kinematics(const SerialChain& chain, const JointVector& q, int frame = kToolFrame);

/// Poses of frames 0..8 (index 0 is the base, identity).
std::array<Pose, kNumFrames + 1> frame_poses(const SerialChain& chain, const JointVector& q);

/// Geometric Jacobian of the tool-frame origin; linear rows first.
Jacobian jacobian(const SerialChain& chain, const JointVector& q);

/// 6-vector task error: translation difference, then rotation_log(R_target·R_currentᵀ).
Twist pose_error(const Pose& target, const Pose& current);

IkResult ik_dls(const SerialChain& chain, const JointVector& q0, const Pose& target,
                const IkParams& params = {}, const NullspaceObjective& objective = {});

}  // namespace ctbot
