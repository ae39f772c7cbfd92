#include <gtest/gtest.h>

#include <fstream>

#include "ctbot/angles.hpp"
#include "ctbot/errors.hpp"
#include "ctbot/robot_model.hpp"
#include "support.hpp"

using namespace ctbot;
using nlohmann::json;

namespace {

const std::string kModelPath = std::string(CTBOT_CONFIG_DIR) + "/robot_model.json";

void expect_same(const RobotModel& a, const RobotModel& b) {
  for (int f = 1; f <= kNumFrames; ++f) {
    const DhRow &x = a.chain.dh.row(f), &y = b.chain.dh.row(f);
    EXPECT_EQ(x.type, y.type) << f;
    EXPECT_EQ(x.a, y.a) << f;
    EXPECT_EQ(x.alpha, y.alpha) << f;
    EXPECT_EQ(x.d_offset, y.d_offset) << f;
    EXPECT_EQ(x.theta_offset, y.theta_offset) << f;
  }
  EXPECT_EQ(a.chain.limits.lower, b.chain.limits.lower);
  EXPECT_EQ(a.chain.limits.upper, b.chain.limits.upper);
  EXPECT_EQ(a.mixing.matrix(), b.mixing.matrix());
  EXPECT_EQ(a.encoder.counts_per_output_rev(), b.encoder.counts_per_output_rev());
  EXPECT_EQ(a.joint4_cable.free_length, b.joint4_cable.free_length);
  EXPECT_EQ(a.joint4_cable.cross_section, b.joint4_cable.cross_section);
  EXPECT_EQ(a.joint4_cable.drive_pulley_radius, b.joint4_cable.drive_pulley_radius);
  EXPECT_EQ(a.joint4_cable.material.name, b.joint4_cable.material.name);
  EXPECT_EQ(a.cable_catalog.size(), b.cable_catalog.size());
  EXPECT_EQ(a.load_rating.joint_torque_limits, b.load_rating.joint_torque_limits);
  EXPECT_EQ(a.thrust_levers.joint4, b.thrust_levers.joint4);
  EXPECT_EQ(a.thrust_levers.joint5, b.thrust_levers.joint5);
}

json shipped_json() {
  std::ifstream in(kModelPath);
  return json::parse(in);
}

}  // namespace

TEST(RobotModelFile, ShippedFileEqualsBuiltInDefault) { expect_same(load_robot_model(kModelPath), default_robot_model()); }

TEST(RobotModelFile, Table2Verbatim) {
  const RobotModel m = load_robot_model(kModelPath);
  const auto& dh = m.chain.dh;
  EXPECT_EQ(dh.row(1).type, JointType::prismatic);
  EXPECT_EQ(dh.row(2).alpha, -kPi / 2);
  EXPECT_EQ(dh.row(4).theta_offset, kPi / 2);
  EXPECT_EQ(dh.row(5).a, 8e-2);
  EXPECT_EQ(dh.row(6).theta_offset, -kPi / 2);
  EXPECT_EQ(dh.row(7).a, 5.57e-2);
  EXPECT_EQ(dh.row(7).d_offset, 2.74e-2);
  EXPECT_EQ(dh.row(8).type, JointType::fixed);
  EXPECT_EQ(dh.row(8).d_offset, 1.15e-1);
}

TEST(RobotModelFile, Table3Verbatim) {
  const auto& m = load_robot_model(kModelPath).mixing.matrix();
  EXPECT_EQ(m(0, 0), 5.73e-3);
  EXPECT_EQ(m(1, 1), 5.73e-3);
  EXPECT_EQ(m(2, 2), 0.24);
  EXPECT_EQ(m(5, 4), -0.62);
  EXPECT_EQ(m(6, 3), -5.26e-3);
  EXPECT_EQ(m(6, 4), 3.23e-3);
  EXPECT_EQ(m(6, 5), -8.73e-3);
  EXPECT_EQ(m(6, 6), 6.35e-3);
}

TEST(RobotModelFile, JsonRoundTrip) {
  const RobotModel m = default_robot_model();
  expect_same(robot_model_from_json(robot_model_to_json(m)), m);
}

TEST(RobotModelFile, WrongSchemaRejected) {
  json j = shipped_json();
  j["schema"] = "something-else/1";
  EXPECT_THROW(robot_model_from_json(j), ConfigError);
}

TEST(RobotModelFile, BadFieldsRejected) {
  json j = shipped_json();
  j["dh"][3]["alpha"] = "quarter";
  EXPECT_THROW(robot_model_from_json(j), ConfigError);

  j = shipped_json();
  j["dh"][0]["type"] = "spherical";
  EXPECT_THROW(robot_model_from_json(j), ConfigError);

  j = shipped_json();
  j["joint_limits"]["lower"][0] = 1.0;
  EXPECT_THROW(robot_model_from_json(j), ConfigError);

  j = shipped_json();
  j["mixing_matrix"].erase(6);
  EXPECT_THROW(robot_model_from_json(j), ConfigError);

  j = shipped_json();
  j["dh"].erase(7);
  EXPECT_THROW(robot_model_from_json(j), std::exception);
}

TEST(RobotModelFile, MissingOrMalformedFile) {
  EXPECT_THROW(load_robot_model("/nonexistent/model.json"), ConfigError);
  const auto path = testing_support::temp_path("broken_model.json");
  std::ofstream(path) << "{ not json";
  EXPECT_THROW(load_robot_model(path), ConfigError);
}
