#include "ctbot/kinematics.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "ctbot/errors.hpp"

namespace ctbot {

namespace {

bool finite(double v) { return std::isfinite(v); }

std::string format_violation(int joint, double value, double lower, double upper) {
  std::ostringstream os;
  os << "joint " << joint << " value " << value << " outside [" << lower << ", " << upper << "]";
  return os.str();
}

}  // namespace

LimitViolation::LimitViolation(int joint, double value, double lower, double upper)
    : std::domain_error(format_violation(joint, value, lower, upper)), joint_(joint), value_(value) {}

DhTable::DhTable(std::vector<DhRow> rows) : rows_(std::move(rows)) {
  if (rows_.size() != static_cast<std::size_t>(kNumFrames)) {
    throw InvalidArgument("DH table needs " + std::to_string(kNumFrames) + " rows, got " +
                          std::to_string(rows_.size()));
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& r = rows_[i];
    if (!finite(r.a) || !finite(r.alpha) || !finite(r.d_offset) || !finite(r.theta_offset)) {
      throw InvalidArgument("DH row " + std::to_string(i + 1) + " has a non-finite constant");
    }
    const bool tool = i + 1 == static_cast<std::size_t>(kToolFrame);
    if (tool != (r.type == JointType::fixed)) {
      throw InvalidArgument("DH row " + std::to_string(i + 1) +
                            (tool ? " must be fixed" : " must be prismatic or revolute"));
    }
  }
}

bool JointLimits::contains(const JointVector& q) const { return !first_violation(q).has_value(); }

JointVector JointLimits::clamp(const JointVector& q) const { return q.cwiseMax(lower).cwiseMin(upper); }

std::optional<int> JointLimits::first_violation(const JointVector& q) const {
  for (int i = 0; i < kNumJoints; ++i) {
    if (!finite(q[i]) || q[i] < lower[i] || q[i] > upper[i]) return i + 1;
  }
  return std::nullopt;
}

void JointLimits::require(const JointVector& q) const {
  if (auto j = first_violation(q)) {
    const int i = *j - 1;
    throw LimitViolation(*j, q[i], lower[i], upper[i]);
  }
}

double Pose::orthonormality_error() const {
  return (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
}

void IkParams::validate() const {
  if (!(damping > 0.0) || !(position_tol > 0.0) || !(orientation_tol > 0.0) || !(step_clamp > 0.0) ||
      max_iterations < 0 || !(nullspace_gain >= 0.0) || !finite(nullspace_gain)) {
    throw InvalidArgument("invalid IK parameters");
  }
}

Eigen::Matrix3d rot_x(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Eigen::Matrix3d r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

Eigen::Matrix3d rot_y(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Eigen::Matrix3d r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

Eigen::Matrix3d rot_z(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Eigen::Matrix3d r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

Eigen::Vector3d rotation_log(const Eigen::Matrix3d& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

Pose dh_transform(const DhRow& row, double q) {
  if (!finite(q)) throw InvalidArgument("non-finite joint coordinate");
  double d = row.d_offset;
  double theta = row.theta_offset;
  if (row.type == JointType::prismatic) d += q;
  if (row.type == JointType::revolute) theta += q;

  Pose out;
  out.rotation = rot_x(row.alpha) * rot_z(theta);
  out.position = Eigen::Vector3d(row.a, 0.0, 0.0) + d * out.rotation.col(2);
  return out;
}

std::array<Pose, kNumFrames + 1> frame_poses(const SerialChain& chain, const JointVector& q) {
  chain.limits.require(q);
  std::array<Pose, kNumFrames + 1> poses;
  for (int f = 1; f <= kNumFrames; ++f) {
    const double qf = f <= kNumJoints ? q[f - 1] : 0.0;
    poses[f] = poses[f - 1] * dh_transform(chain.dh.row(f), qf);
  }
  return poses;
}

Pose forward_kinematics(const SerialChain& chain, const JointVector& q, int frame) {
  if (frame < 1 || frame > kNumFrames) throw InvalidArgument("frame index out of range");
  chain.limits.require(q);
  Pose pose;
  for (int f = 1; f <= frame; ++f) {
    const double qf = f <= kNumJoints ? q[f - 1] : 0.0;
    pose = pose * dh_transform(chain.dh.row(f), qf);
  }
  return pose;
}

Jacobian jacobian(const SerialChain& chain, const JointVector& q) {
  const auto poses = frame_poses(chain, q);
  const Eigen::Vector3d tip = poses[kToolFrame].position;
  Jacobian jac = Jacobian::Zero();
  for (int j = 0; j < kNumJoints; ++j) {
    const Pose& frame = poses[j + 1];
    const Eigen::Vector3d axis = frame.rotation.col(2);
    if (chain.dh.row(j + 1).type == JointType::prismatic) {
      jac.block<3, 1>(0, j) = axis;
    } else {
      jac.block<3, 1>(0, j) = axis.cross(tip - frame.position);
      jac.block<3, 1>(3, j) = axis;
    }
  }
  return jac;
}

Twist pose_error(const Pose& target, const Pose& current) {
  Twist e;
  e.head<3>() = target.position - current.position;
  e.tail<3>() = rotation_log(target.rotation * current.rotation.transpose());
  return e;
}

IkResult ik_dls(const SerialChain& chain, const JointVector& q0, const Pose& target,
                const IkParams& params, const NullspaceObjective& objective) {
  params.validate();
  chain.limits.require(q0);
  if (!target.position.allFinite() || !target.rotation.allFinite()) {
    throw InvalidArgument("non-finite IK target");
  }

  const bool use_nullspace = objective && params.nullspace_gain > 0.0;
  const Eigen::Matrix<double, 6, 6> damping =
      params.damping * params.damping * Eigen::Matrix<double, 6, 6>::Identity();

  IkResult result;
  result.q = q0;
  for (int it = 0;; ++it) {
    const Twist e = pose_error(target, forward_kinematics(chain, result.q));
    result.position_residual = e.head<3>().norm();
    result.orientation_residual = e.tail<3>().norm();
    result.iterations = it;
    if (!e.allFinite()) throw NumericalFailure("non-finite pose error");
    if (result.position_residual < params.position_tol &&
        result.orientation_residual < params.orientation_tol) {
      result.converged = true;
      return result;
    }
    if (it == params.max_iterations) break;

    // joints pinned against a limit by the step drop out of the solve
    Jacobian jac = jacobian(chain, result.q);
    std::array<bool, kNumJoints> blocked{};
    JointVector dq;
    for (int pass = 0; pass <= kNumJoints; ++pass) {
      const Eigen::Matrix<double, 6, 6> jjt = jac * jac.transpose() + damping;
      const Eigen::LDLT<Eigen::Matrix<double, 6, 6>> ldlt(jjt);
      if (ldlt.info() != Eigen::Success) throw NumericalFailure("damped normal matrix not factorizable");
      dq = jac.transpose() * ldlt.solve(e);

      if (use_nullspace) {
        const JointVector g = objective(result.q);
        if (!g.allFinite()) throw NumericalFailure("non-finite nullspace gradient");
        const Eigen::Matrix<double, kNumJoints, 6> pinv = jac.completeOrthogonalDecomposition().pseudoInverse();
        const Eigen::Matrix<double, kNumJoints, kNumJoints> projector =
            Eigen::Matrix<double, kNumJoints, kNumJoints>::Identity() - pinv * jac;
        JointVector dn = params.nullspace_gain * projector * g;
        // the projection is first order only; a secondary step larger than
        // the task step would keep the residual from closing
        const double cap = dq.norm();
        if (dn.norm() > cap) dn *= cap / dn.norm();
        dq += dn;
      }
      for (int j = 0; j < kNumJoints; ++j) {
        if (blocked[static_cast<std::size_t>(j)]) dq[j] = 0.0;
      }

      bool changed = false;
      for (int j = 0; j < kNumJoints; ++j) {
        const bool at_lower = result.q[j] <= chain.limits.lower[j] && dq[j] < 0.0;
        const bool at_upper = result.q[j] >= chain.limits.upper[j] && dq[j] > 0.0;
        if (!blocked[static_cast<std::size_t>(j)] && (at_lower || at_upper)) {
          blocked[static_cast<std::size_t>(j)] = true;
          jac.col(j).setZero();
          changed = true;
        }
      }
      if (!changed) break;
    }
    if (!dq.allFinite()) throw NumericalFailure("non-finite joint step");

    const double largest = dq.cwiseAbs().maxCoeff();
    if (largest > params.step_clamp) dq *= params.step_clamp / largest;
    result.q = chain.limits.clamp(result.q + dq);
  }
  result.converged = false;
  return result;
}

}  // namespace ctbot
