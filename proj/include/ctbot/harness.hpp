#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "ctbot/controller.hpp"
#include "ctbot/kinematics.hpp"
#include "ctbot/robot_model.hpp"

namespace ctbot {

// Measurement harnesses mirroring the bench experiments: replay a pose
// sequence several times and log where the tip ends up, and score logged tip
// positions against a board of targets.

struct PoseLogEntry {
  std::size_t pose_index = 0;
  int repetition = 0;
  Pose tip;
  bool settled = false;
};

struct ReplayParams {
  int repetitions = 5;
  /// Measured counts must equal the setpoints for this many consecutive ticks.
  int settle_ticks = 5;
  /// The stages cover about 2 mm/s at full duty, so full-travel moves take minutes.
  std::uint64_t timeout_ticks = 300'000;
  /// Setpoints are re-sent at this period to keep the watchdog fed.
  std::uint64_t resend_ticks = 20;
};

/// Drives an emulated controller through `sequence` (starting from `home`)
/// `repetitions` times and logs the tip pose computed from the measured
/// encoder counts once each pose has settled.
std::vector<PoseLogEntry> replay_pose_sequence(const RobotModel& model, const std::vector<JointVector>& sequence,
                                               const ReplayParams& params = {}, const ControllerConfig& controller = {},
                                               const JointVector& home = JointVector::Zero());

struct RepeatabilityStats {
  /// Worst over poses of the RMS distance from the per-pose mean position (m).
  double position = 0.0;
  /// Worst over poses of the RMS angle from the first repetition's rotation (rad).
  double orientation = 0.0;
  std::size_t poses = 0;
  bool all_settled = true;
};

RepeatabilityStats repeatability(const std::vector<PoseLogEntry>& log);

struct TargetScore {
  std::vector<double> errors;  // m, per target
  double mean = 0.0;
  double stddev = 0.0;
};

/// Euclidean tip-to-target error for each (target, logged tip) pair.
TargetScore score_targets(const std::vector<Eigen::Vector3d>& targets, const std::vector<Pose>& tips);

/// CSV: pose,rep,settled,x,y,z,r11,...,r33
void write_pose_log(std::ostream& out, const std::vector<PoseLogEntry>& log);
std::vector<PoseLogEntry> read_pose_log(std::istream& in);

}  // namespace ctbot
