#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctbot/kinematics.hpp"
#include "ctbot/statics.hpp"
#include "ctbot/transmission.hpp"

namespace ctbot {

/// Everything the robot model file carries.
struct RobotModel {
  SerialChain chain;
  MixingMatrix mixing;
  EncoderSpec encoder;
  std::vector<CableMaterial> cable_catalog;
  CableRun joint4_cable;
  LoadRating load_rating;
  ThrustLevers thrust_levers;
};

/// The seven-joint biopsy arm with its published DH table and mixing matrix.
RobotModel default_robot_model();
DhTable default_dh_table();
JointLimits default_joint_limits();
MixingMatrix default_mixing_matrix();

RobotModel robot_model_from_json(const nlohmann::json& j);
nlohmann::json robot_model_to_json(const RobotModel& model);

/// Throws ConfigError on unreadable or invalid files.
RobotModel load_robot_model(const std::filesystem::path& path);

}  // namespace ctbot
