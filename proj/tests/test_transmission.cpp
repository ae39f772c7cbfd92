#include <gtest/gtest.h>

#include <random>

#include "ctbot/errors.hpp"
#include "ctbot/robot_model.hpp"
#include "ctbot/transmission.hpp"

using namespace ctbot;

namespace {

const MixingMatrix& mixing() {
  static const MixingMatrix m = default_mixing_matrix();
  return m;
}

JointVector table3_column4() {
  JointVector q;
  q << 0, 0, 0, 0.45, -0.35, 0.94, -5.26e-3;
  return q;
}

}  // namespace

TEST(Mixing, ZeroMapsToZero) {
  EXPECT_EQ(actuators_to_joints(mixing(), ActuatorVector{}), JointVector::Zero());
  EXPECT_EQ(joints_to_actuators(mixing(), JointVector::Zero()).m, JointVector::Zero());
}

TEST(Mixing, Actuator4Column) {
  EXPECT_EQ(actuators_to_joints(mixing(), ActuatorVector::unit(4)), table3_column4());
}

TEST(Mixing, Actuator1Row) {
  const JointVector q = actuators_to_joints(mixing(), ActuatorVector::unit(1));
  EXPECT_EQ(q[0], 5.73e-3);
  EXPECT_EQ(q.tail<6>(), (Eigen::Matrix<double, 6, 1>::Zero()));
}

TEST(Mixing, InverseOfColumn4IsUnitActuator) {
  const ActuatorVector m = joints_to_actuators(mixing(), table3_column4());
  EXPECT_LT((m.m - ActuatorVector::unit(4).m).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Mixing, RoundTripRandom) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    JointVector q;
    for (int i = 0; i < kNumJoints; ++i) q[i] = d(rng);
    const JointVector back = actuators_to_joints(mixing(), joints_to_actuators(mixing(), q));
    ASSERT_LE((back - q).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Mixing, ZeroDiagonalIsSingular) {
  MixingMatrix::Matrix m = default_mixing_matrix().matrix();
  m(2, 2) = 0.0;
  EXPECT_THROW(joints_to_actuators(MixingMatrix(m), JointVector::Ones()), SingularTransmission);
}

TEST(Mixing, UpperTriangleRejected) {
  MixingMatrix::Matrix m = default_mixing_matrix().matrix();
  m(0, 3) = 0.1;
  EXPECT_THROW(MixingMatrix{m}, InvalidArgument);
}

TEST(Encoder, OutputResolution) {
  const EncoderSpec enc;
  EXPECT_EQ(enc.counts_per_output_rev(), 958000.0);
  EXPECT_NEAR(enc.resolution_deg(), 3.758e-4, 5e-8);
}

TEST(Encoder, OneRevolutionIsExact) {
  ActuatorVector m;
  m[2] = 1.0;
  const auto q = quantize_actuator(m, EncoderSpec{});
  EXPECT_EQ(q.counts[2], 958000);
  EXPECT_EQ(q.quantized[2], 1.0);
}

TEST(Encoder, OneCountOnJoint3) {
  EncoderCounts counts{};
  counts[2] = 1;
  const JointVector q = actuators_to_joints(mixing(), counts_to_actuators(counts, EncoderSpec{}));
  EXPECT_DOUBLE_EQ(q[2], 0.24 / 958000.0);
}

TEST(Encoder, ZeroAndRounding) {
  const auto zero = quantize_actuator(ActuatorVector{}, EncoderSpec{});
  for (auto c : zero.counts) EXPECT_EQ(c, 0);
  ActuatorVector half;
  half[0] = 0.5 / 958000.0;
  half[1] = -0.5 / 958000.0;
  half[2] = 0.49 / 958000.0;
  const auto q = quantize_actuator(half, EncoderSpec{});
  EXPECT_EQ(q.counts[0], 1);
  EXPECT_EQ(q.counts[1], -1);
  EXPECT_EQ(q.counts[2], 0);
}

TEST(Encoder, OverflowIsRangeError) {
  ActuatorVector m;
  m[0] = 2000.0;  // 1.9e9 counts
  EXPECT_NO_THROW(quantize_actuator(m, EncoderSpec{}));
  m[0] = 1e4;  // 9.58e9 counts
  EXPECT_THROW(quantize_actuator(m, EncoderSpec{}), RangeError);
  m[0] = NAN;
  EXPECT_THROW(quantize_actuator(m, EncoderSpec{}), InvalidArgument);
}

TEST(Encoder, QuantizationErrorBounded) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(-5.0, 5.0);
  const EncoderSpec enc;
  for (int trial = 0; trial < 1000; ++trial) {
    ActuatorVector m;
    for (int i = 0; i < kNumJoints; ++i) m[i] = d(rng);
    const auto q = quantize_actuator(m, enc);
    ASSERT_LE((q.quantized.m - m.m).cwiseAbs().maxCoeff(), 0.5 / enc.counts_per_output_rev() + 1e-15);
    ASSERT_EQ(counts_to_actuators(q.counts, enc).m, q.quantized.m);
  }
}
