#include <gtest/gtest.h>

#include <sstream>

#include "ctbot/errors.hpp"
#include "ctbot/harness.hpp"
#include "ctbot/teleop.hpp"

using namespace ctbot;

namespace {

std::vector<JointVector> sequence() {
  std::vector<JointVector> s(3);
  s[0] << 0.10, 0.05, 0.2, 0.3, -0.4, 0.5, 0.01;
  s[1] << 0.20, 0.15, -0.5, -0.2, 0.6, -0.3, 0.03;
  s[2] << 0.05, 0.25, 1.0, 0.1, 0.2, 1.1, 0.0;
  return s;
}

}  // namespace

TEST(Harness, SimulatedRepeatabilityIsZero) {
  const RobotModel model = default_robot_model();
  const auto log = replay_pose_sequence(model, sequence());
  ASSERT_EQ(log.size(), 15u);
  const RepeatabilityStats stats = repeatability(log);
  EXPECT_TRUE(stats.all_settled);
  EXPECT_EQ(stats.poses, 3u);
  EXPECT_EQ(stats.position, 0.0);
  EXPECT_EQ(stats.orientation, 0.0);
}

TEST(Harness, LoggedTipIsQuantizedForwardKinematics) {
  const RobotModel model = default_robot_model();
  const auto seq = sequence();
  const auto log = replay_pose_sequence(model, seq, {1});
  std::vector<Eigen::Vector3d> targets;
  std::vector<Pose> tips;
  for (const auto& e : log) {
    targets.push_back(forward_kinematics(model.chain, seq[e.pose_index]).position);
    tips.push_back(e.tip);
  }
  const TargetScore score = score_targets(targets, tips);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const JointVector quantized =
        model.chain.limits.clamp(setpoints_to_joints(model, joints_to_setpoints(model, seq[i])));
    const double analytic =
        (forward_kinematics(model.chain, quantized).position - forward_kinematics(model.chain, seq[i]).position).norm();
    EXPECT_NEAR(score.errors[i], analytic, 1e-15);
    EXPECT_LT(score.errors[i], 1e-5);
  }
}

TEST(Harness, UnsettledWhenTimeoutTooShort) {
  ReplayParams p;
  p.repetitions = 1;
  p.timeout_ticks = 3;
  const auto log = replay_pose_sequence(default_robot_model(), sequence(), p);
  EXPECT_FALSE(repeatability(log).all_settled);
}

TEST(Harness, RejectsBadInput) {
  auto seq = sequence();
  seq[1][0] = 1.0;
  EXPECT_THROW(replay_pose_sequence(default_robot_model(), seq), LimitViolation);
  ReplayParams p;
  p.repetitions = 0;
  EXPECT_THROW(replay_pose_sequence(default_robot_model(), sequence(), p), InvalidArgument);
}

TEST(Harness, RepeatabilityArithmetic) {
  std::vector<PoseLogEntry> log;
  for (int rep = 0; rep < 2; ++rep) {
    PoseLogEntry e;
    e.repetition = rep;
    e.settled = true;
    e.tip.position = Eigen::Vector3d(rep == 0 ? -1e-3 : 1e-3, 0, 0);
    e.tip.rotation = rot_z(rep == 0 ? 0.0 : 0.02);
    log.push_back(e);
  }
  const auto stats = repeatability(log);
  EXPECT_NEAR(stats.position, 1e-3, 1e-15);
  EXPECT_NEAR(stats.orientation, 0.02 / std::sqrt(2.0), 1e-12);
}

TEST(Harness, TargetScoreStatistics) {
  std::vector<Eigen::Vector3d> targets{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  std::vector<Pose> tips(3);
  tips[0].position = {0, 0, 1e-3};
  tips[1].position = {1, 2e-3, 0};
  tips[2].position = {0, 1, 3e-3};
  const auto s = score_targets(targets, tips);
  EXPECT_NEAR(s.mean, 2e-3, 1e-15);
  EXPECT_NEAR(s.stddev, std::sqrt(2.0 / 3.0) * 1e-3, 1e-15);
  tips.pop_back();
  EXPECT_THROW(score_targets(targets, tips), InvalidArgument);
}

TEST(Harness, PoseLogRoundTrip) {
  const auto log = replay_pose_sequence(default_robot_model(), sequence(), {2});
  std::stringstream buf;
  write_pose_log(buf, log);
  const auto back = read_pose_log(buf);
  ASSERT_EQ(back.size(), log.size());
  for (std::size_t i = 0; i < log.size(); ++i) {
    EXPECT_EQ(back[i].pose_index, log[i].pose_index);
    EXPECT_EQ(back[i].repetition, log[i].repetition);
    EXPECT_EQ(back[i].settled, log[i].settled);
    EXPECT_EQ(back[i].tip.position, log[i].tip.position);
    EXPECT_EQ(back[i].tip.rotation, log[i].tip.rotation);
  }
  std::stringstream bad("header\n1,2,3\n");
  EXPECT_THROW(read_pose_log(bad), ConfigError);
}
