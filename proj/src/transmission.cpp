#include "ctbot/transmission.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ctbot/errors.hpp"

namespace ctbot {

ActuatorVector ActuatorVector::unit(int actuator) {
  if (actuator < 1 || actuator > kNumJoints) throw InvalidArgument("actuator index out of range");
  ActuatorVector v;
  v.m[actuator - 1] = 1.0;
  return v;
}

MixingMatrix::MixingMatrix(const Matrix& m) : m_(m) {
  if (!m_.allFinite()) throw InvalidArgument("mixing matrix has non-finite entries");
  for (int i = 0; i < kNumJoints; ++i) {
    for (int j = i + 1; j < kNumJoints; ++j) {
      if (m_(i, j) != 0.0) {
        throw InvalidArgument("mixing matrix must be lower triangular (entry " + std::to_string(i + 1) +
                              "," + std::to_string(j + 1) + ")");
      }
    }
  }
}

JointVector actuators_to_joints(const MixingMatrix& mixing, const ActuatorVector& m) {
  return mixing.matrix() * m.m;
}

ActuatorVector joints_to_actuators(const MixingMatrix& mixing, const JointVector& q) {
  const auto& mat = mixing.matrix();
  ActuatorVector out;
  for (int i = 0; i < kNumJoints; ++i) {
    if (mat(i, i) == 0.0) {
      throw SingularTransmission("mixing matrix diagonal entry " + std::to_string(i + 1) + " is zero");
    }
    double acc = q[i];
    for (int j = 0; j < i; ++j) acc -= mat(i, j) * out.m[j];
    out.m[i] = acc / mat(i, i);
  }
  return out;
}

QuantizedActuators quantize_actuator(const ActuatorVector& m, const EncoderSpec& enc) {
  const double scale = enc.counts_per_output_rev();
  QuantizedActuators out;
  for (int i = 0; i < kNumJoints; ++i) {
    if (!std::isfinite(m.m[i])) throw InvalidArgument("non-finite actuator value");
    // std::round rounds half away from zero.
    const double counts = std::round(m.m[i] * scale);
    if (counts > std::numeric_limits<std::int32_t>::max() || counts < std::numeric_limits<std::int32_t>::min()) {
      throw RangeError("actuator " + std::to_string(i + 1) + " exceeds 32-bit encoder count range");
    }
    out.counts[i] = static_cast<std::int32_t>(counts);
    out.quantized.m[i] = counts / scale;
  }
  return out;
}

ActuatorVector counts_to_actuators(const EncoderCounts& counts, const EncoderSpec& enc) {
  ActuatorVector out;
  for (int i = 0; i < kNumJoints; ++i) out.m[i] = counts[i] / enc.counts_per_output_rev();
  return out;
}

}  // namespace ctbot
