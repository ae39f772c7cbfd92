#include "ctbot/teleop.hpp"

#include <algorithm>
#include <cmath>

#include "ctbot/errors.hpp"
#include "ctbot/transmission.hpp"

namespace ctbot {

namespace {

Eigen::Vector3d clamp_unit(const Eigen::Vector3d& v) {
  Eigen::Vector3d out = v.cwiseMax(-1.0).cwiseMin(1.0);
  for (int i = 0; i < 3; ++i) {
    if (!std::isfinite(out[i])) out[i] = 0.0;
  }
  return out;
}

SerialChain pinned_needle_chain(const SerialChain& chain, double extension) {
  SerialChain pinned = chain;
  pinned.limits.lower[kNumJoints - 1] = extension;
  pinned.limits.upper[kNumJoints - 1] = extension;
  return pinned;
}

}  // namespace

TeleopState make_teleop_state(const SerialChain& chain, const JointVector& q, double gamma) {
  const Pose tip = forward_kinematics(chain, q);
  return {tip.position, tip.rotation, gamma, q, q[kNumJoints - 1]};
}

Eigen::Matrix3d euler2mat(const Eigen::Vector3d& rpy) { return rot_x(rpy.x()) * rot_y(rpy.y()) * rot_z(rpy.z()); }

Eigen::Matrix3d reorthonormalize(const Eigen::Matrix3d& r) {
  return Eigen::Quaterniond(r).normalized().toRotationMatrix();
}

Eigen::Vector3d scaled_translation(const InputSample& input, const TeleopConfig& config) {
  return config.translation_gain * clamp_unit(input.v);
}

Eigen::Vector3d scaled_rotation(const InputSample& input, const TeleopConfig& config) {
  return config.rotation_gain * clamp_unit(input.r);
}

std::pair<Eigen::Vector3d, Eigen::Matrix3d> integrate_pose(const TeleopState& state, const InputSample& input,
                                                           const TeleopConfig& config) {
  const Eigen::Vector3d v = scaled_translation(input, config);
  const Eigen::Vector3d r = scaled_rotation(input, config);
  const Eigen::Vector3d p_next = state.target_position + state.gamma * v;
  if (r.isZero(0.0)) return {p_next, state.target_rotation};
  return {p_next, reorthonormalize(euler2mat(state.gamma * r) * state.target_rotation)};
}

double adjust_gamma(const TeleopState& state, int direction, const TeleopConfig& config) {
  double g = state.gamma;
  if (direction > 0) g *= config.gamma_step;
  if (direction < 0) g /= config.gamma_step;
  return std::clamp(g, config.gamma_min, 1.0);
}

double needle_jog(const TeleopState& state, int direction, const JointLimits& limits, const TeleopConfig& config) {
  const int idx = kNumJoints - 1;
  const double step = direction > 0 ? config.needle_step : direction < 0 ? -config.needle_step : 0.0;
  return std::clamp(state.needle_extension + step, limits.lower[idx], limits.upper[idx]);
}

std::string to_string(TeleopEvent e) {
  switch (e) {
    case TeleopEvent::rubber_band: return "rubber_band";
    case TeleopEvent::collision_guard: return "collision_guard";
    case TeleopEvent::connection_lost: return "connection_lost";
  }
  return "?";
}

AxisCounts joints_to_setpoints(const RobotModel& model, const JointVector& q) {
  const auto quantized = quantize_actuator(joints_to_actuators(model.mixing, q), model.encoder);
  AxisCounts out{};
  for (int i = 0; i < kNumJoints; ++i) out[static_cast<std::size_t>(i)] = quantized.counts[static_cast<std::size_t>(i)];
  return out;
}

JointVector setpoints_to_joints(const RobotModel& model, const AxisCounts& counts) {
  ActuatorVector m;
  for (int i = 0; i < kNumJoints; ++i) {
    m.m[i] = static_cast<double>(counts[static_cast<std::size_t>(i)]) / model.encoder.counts_per_output_rev();
  }
  return actuators_to_joints(model.mixing, m);
}

TeleopTickResult teleop_tick(TeleopState& state, const InputSample& input, const TeleopContext& context) {
  if (context.model == nullptr) throw InvalidArgument("teleop context has no robot model");
  const RobotModel& model = *context.model;
  const TeleopConfig& cfg = context.config;
  TeleopTickResult result;

  if (input.gamma_up) state.gamma = adjust_gamma(state, +1, cfg);
  if (input.gamma_down) state.gamma = adjust_gamma(state, -1, cfg);

  if (input.needle_jog != 0) {
    const double extension = needle_jog(state, input.needle_jog, model.chain.limits, cfg);
    state.target_position += (extension - state.needle_extension) * state.target_rotation.col(2);
    state.needle_extension = extension;
  }

  std::tie(state.target_position, state.target_rotation) = integrate_pose(state, input, cfg);

  const SerialChain chain = pinned_needle_chain(model.chain, state.needle_extension);
  JointVector start = state.q;
  start[kNumJoints - 1] = state.needle_extension;
  start = chain.limits.clamp(start);

  IkParams params = cfg.ik;
  params.max_iterations = cfg.ik_iterations;
  const Pose target{state.target_position, state.target_rotation};
  const IkResult ik = ik_dls(chain, start, target, params);
  result.ik = {ik.position_residual, ik.orientation_residual, ik.iterations, ik.converged};

  JointVector next = ik.q;
  if (cfg.collision_guard && context.scene != nullptr && context.body != nullptr &&
      !is_collision_free(*context.scene, *context.body, model.chain, next)) {
    // stay put; the last achievable pose becomes the target
    next = state.q;
    state.needle_extension = next[kNumJoints - 1];
    const Pose held = forward_kinematics(model.chain, next);
    state.target_position = held.position;
    state.target_rotation = held.rotation;
    result.events.push_back(TeleopEvent::collision_guard);
  } else {
    const Pose achieved = forward_kinematics(model.chain, next);
    const Twist gap = pose_error(target, achieved);
    if (gap.head<3>().norm() > cfg.divergence_position || gap.tail<3>().norm() > cfg.divergence_orientation) {
      state.target_position = achieved.position;
      state.target_rotation = achieved.rotation;
      result.events.push_back(TeleopEvent::rubber_band);
    }
  }
  state.q = next;
  result.setpoints = joints_to_setpoints(model, state.q);
  return result;
}

TeleopSession::TeleopSession(TeleopContext context, TeleopState initial, SetpointSink sink)
    : context_(std::move(context)), state_(std::move(initial)), sink_(std::move(sink)) {}

TeleopTickResult TeleopSession::tick(const InputSample& input) {
  if (!connected_) {
    TeleopTickResult frozen;
    frozen.setpoints = joints_to_setpoints(*context_.model, state_.q);
    frozen.events.push_back(TeleopEvent::connection_lost);
    return frozen;
  }
  TeleopState candidate = state_;
  TeleopTickResult result = teleop_tick(candidate, input, context_);
  if (sink_ && !sink_(result.setpoints)) {
    connected_ = false;
    result.setpoints = joints_to_setpoints(*context_.model, state_.q);
    result.events.push_back(TeleopEvent::connection_lost);
    return result;
  }
  state_ = std::move(candidate);
  return result;
}

}  // namespace ctbot
