#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctbot/angles.hpp"
#include "ctbot/controller.hpp"
#include "ctbot/kinematics.hpp"
#include "ctbot/robot_model.hpp"
#include "ctbot/scene.hpp"

namespace ctbot {

inline constexpr double kTeleopRate = 400.0;  // Hz

struct TeleopConfig {
  double translation_gain = 1e-3;         // m per device unit per tick at gamma = 1
  double rotation_gain = deg2rad(0.2);    // rad per device unit per tick at gamma = 1
  double gamma_step = 1.25;
  double gamma_min = 0.01;
  double needle_step = 1e-4;              // m per jog
  int ik_iterations = 3;
  IkParams ik;
  /// Rubber-band thresholds between commanded target and achieved pose.
  double divergence_position = 5e-3;      // m
  double divergence_orientation = deg2rad(5.0);
  bool collision_guard = false;
};

/// Commanded tool-frame pose (robot base frame) and the joint state tracking it.
struct TeleopState {
  Eigen::Vector3d target_position = Eigen::Vector3d::Zero();
  Eigen::Matrix3d target_rotation = Eigen::Matrix3d::Identity();
  double gamma = 1.0;
  JointVector q = JointVector::Zero();
  double needle_extension = 0.0;
};

/// One device sample. `v` and `r` components are clamped to [-1, 1].
struct InputSample {
  Eigen::Vector3d v = Eigen::Vector3d::Zero();  // x, y, z
  Eigen::Vector3d r = Eigen::Vector3d::Zero();  // roll, pitch, yaw
  bool gamma_up = false;
  bool gamma_down = false;
  int needle_jog = 0;  // +1, 0, -1
};

/// State whose target is the tool pose at q.
TeleopState make_teleop_state(const SerialChain& chain, const JointVector& q, double gamma = 1.0);

/// Intrinsic X-then-Y-then-Z (roll, pitch, yaw): Rx(roll)·Ry(pitch)·Rz(yaw).
Eigen::Matrix3d euler2mat(const Eigen::Vector3d& rpy);

/// Nearest rotation matrix (via unit quaternion).
Eigen::Matrix3d reorthonormalize(const Eigen::Matrix3d& r);

/// Device units to per-tick increments before gamma scaling.
Eigen::Vector3d scaled_translation(const InputSample& input, const TeleopConfig& config);
Eigen::Vector3d scaled_rotation(const InputSample& input, const TeleopConfig& config);

/// p + γ·v and euler2mat(γ·r)·R, re-orthonormalized.
std::pair<Eigen::Vector3d, Eigen::Matrix3d> integrate_pose(const TeleopState& state, const InputSample& input,
                                                           const TeleopConfig& config = {});

double adjust_gamma(const TeleopState& state, int direction, const TeleopConfig& config = {});

/// New needle extension after one ±0.1 mm jog, clamped to the q7 limits.
double needle_jog(const TeleopState& state, int direction, const JointLimits& limits,
                  const TeleopConfig& config = {});

enum class TeleopEvent { rubber_band, collision_guard, connection_lost };
std::string to_string(TeleopEvent e);

struct IkReport {
  double position_residual = 0.0;
  double orientation_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct TeleopTickResult {
  AxisCounts setpoints{};
  IkReport ik;
  std::vector<TeleopEvent> events;
};

/// Everything a tick needs besides the state. `scene` and `body` are used
/// only when the collision guard is on.
struct TeleopContext {
  const RobotModel* model = nullptr;
  TeleopConfig config;
  const Scene* scene = nullptr;
  const RobotBody* body = nullptr;
};

/// gamma buttons → needle jog → integrate_pose → IK (warm start, q7 pinned to
/// the needle extension) → rubber-band / collision guard → actuator counts.
TeleopTickResult teleop_tick(TeleopState& state, const InputSample& input, const TeleopContext& context);

/// Joint vector to the 8-axis setpoint message (axis 8 unused, held at 0).
AxisCounts joints_to_setpoints(const RobotModel& model, const JointVector& q);

/// Joint vector implied by measured encoder counts.
JointVector setpoints_to_joints(const RobotModel& model, const AxisCounts& counts);

/// Teleop loop that forwards setpoints through a sink. A failed send freezes
/// the local state at its pre-tick value and reports connection_lost.
class TeleopSession {
 public:
  using SetpointSink = std::function<bool(const AxisCounts&)>;

  TeleopSession(TeleopContext context, TeleopState initial, SetpointSink sink);

  TeleopTickResult tick(const InputSample& input);
  const TeleopState& state() const noexcept { return state_; }
  bool connected() const noexcept { return connected_; }

 private:
  TeleopContext context_;
  TeleopState state_;
  SetpointSink sink_;
  bool connected_ = true;
};

}  // namespace ctbot
