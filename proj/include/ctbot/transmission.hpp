#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Core>

#include "ctbot/kinematics.hpp"

namespace ctbot {

/// Actuator displacements in gearbox-output revolutions.
struct ActuatorVector {
  Eigen::Matrix<double, kNumJoints, 1> m = Eigen::Matrix<double, kNumJoints, 1>::Zero();

  static ActuatorVector unit(int actuator);  // 1-based
  double operator[](int i) const { return m[i]; }
  double& operator[](int i) { return m[i]; }
};

/// Actuator-to-joint map q = M·m (rows joints, columns actuators). Lower triangular.
class MixingMatrix {
 public:
  using Matrix = Eigen::Matrix<double, kNumJoints, kNumJoints>;

  explicit MixingMatrix(const Matrix& m);

  const Matrix& matrix() const noexcept { return m_; }
  double operator()(int joint, int actuator) const { return m_(joint, actuator); }

 private:
  Matrix m_;
};

struct EncoderSpec {
  int counts_per_motor_rev = 2000;
  int gear_ratio = 479;

  double counts_per_output_rev() const { return static_cast<double>(counts_per_motor_rev) * gear_ratio; }
  /// Output-shaft resolution in degrees per count.
  double resolution_deg() const { return 360.0 / counts_per_output_rev(); }
};

using EncoderCounts = std::array<std::int32_t, kNumJoints>;

struct QuantizedActuators {
  EncoderCounts counts{};
  ActuatorVector quantized;
};

JointVector actuators_to_joints(const MixingMatrix& mixing, const ActuatorVector& m);

/// Forward substitution on the lower-triangular mixing matrix.
ActuatorVector joints_to_actuators(const MixingMatrix& mixing, const JointVector& q);

/// Rounds to the nearest encoder count, ties away from zero. Throws RangeError
/// when a count does not fit in a 32-bit integer.
QuantizedActuators quantize_actuator(const ActuatorVector& m, const EncoderSpec& enc);

ActuatorVector counts_to_actuators(const EncoderCounts& counts, const EncoderSpec& enc);

}  // namespace ctbot
