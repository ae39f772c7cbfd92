#include "ctbot/harness.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "ctbot/controller_protocol.hpp"
#include "ctbot/errors.hpp"
#include "ctbot/teleop.hpp"

namespace ctbot {

std::vector<PoseLogEntry> replay_pose_sequence(const RobotModel& model, const std::vector<JointVector>& sequence,
                                               const ReplayParams& params, const ControllerConfig& controller_config,
                                               const JointVector& home) {
  if (params.repetitions < 1 || params.settle_ticks < 1 || params.resend_ticks < 1) {
    throw InvalidArgument("replay needs >= 1 repetition, settle tick and resend period");
  }
  for (const auto& q : sequence) model.chain.limits.require(q);

  MotorController controller(controller_config);
  controller.reset_positions(joints_to_setpoints(model, home));
  controller.handle_message(serialize_request(Enable{}));

  std::vector<PoseLogEntry> log;
  log.reserve(sequence.size() * static_cast<std::size_t>(params.repetitions));
  for (int rep = 0; rep < params.repetitions; ++rep) {
    for (std::size_t i = 0; i < sequence.size(); ++i) {
      const AxisCounts setpoints = joints_to_setpoints(model, sequence[i]);
      const std::string message = serialize_request(SetSetpoints{setpoints});
      int held = 0;
      std::uint64_t t = 0;
      for (; t < params.timeout_ticks && held < params.settle_ticks; ++t) {
        if (t % params.resend_ticks == 0) controller.handle_message(message);
        controller.tick();
        held = controller.positions() == setpoints ? held + 1 : 0;
      }
      PoseLogEntry entry;
      entry.pose_index = i;
      entry.repetition = rep;
      entry.settled = held >= params.settle_ticks;
      const JointVector measured = model.chain.limits.clamp(setpoints_to_joints(model, controller.positions()));
      entry.tip = forward_kinematics(model.chain, measured);
      log.push_back(entry);
    }
  }
  return log;
}

RepeatabilityStats repeatability(const std::vector<PoseLogEntry>& log) {
  std::map<std::size_t, std::vector<const PoseLogEntry*>> by_pose;
  RepeatabilityStats stats;
  for (const auto& e : log) {
    by_pose[e.pose_index].push_back(&e);
    stats.all_settled = stats.all_settled && e.settled;
  }
  stats.poses = by_pose.size();
  for (const auto& [index, entries] : by_pose) {
    // offsets from the first repetition keep identical logs at exactly zero
    const Eigen::Vector3d& origin = entries.front()->tip.position;
    Eigen::Vector3d mean_offset = Eigen::Vector3d::Zero();
    for (const auto* e : entries) mean_offset += e->tip.position - origin;
    mean_offset /= static_cast<double>(entries.size());
    double pos_sq = 0.0, rot_sq = 0.0;
    const Eigen::Matrix3d& reference = entries.front()->tip.rotation;
    for (const auto* e : entries) {
      pos_sq += (e->tip.position - origin - mean_offset).squaredNorm();
      if (e->tip.rotation != reference) {
        rot_sq += rotation_log(e->tip.rotation * reference.transpose()).squaredNorm();
      }
    }
    const double n = static_cast<double>(entries.size());
    stats.position = std::max(stats.position, std::sqrt(pos_sq / n));
    stats.orientation = std::max(stats.orientation, std::sqrt(rot_sq / n));
  }
  return stats;
}

TargetScore score_targets(const std::vector<Eigen::Vector3d>& targets, const std::vector<Pose>& tips) {
  if (targets.size() != tips.size()) throw InvalidArgument("targets and logged tips differ in length");
  TargetScore score;
  if (targets.empty()) return score;
  score.errors.reserve(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) score.errors.push_back((tips[i].position - targets[i]).norm());
  for (double e : score.errors) score.mean += e;
  score.mean /= static_cast<double>(score.errors.size());
  for (double e : score.errors) score.stddev += (e - score.mean) * (e - score.mean);
  score.stddev = std::sqrt(score.stddev / static_cast<double>(score.errors.size()));
  return score;
}

void write_pose_log(std::ostream& out, const std::vector<PoseLogEntry>& log) {
  out << "pose,rep,settled,x,y,z,r11,r12,r13,r21,r22,r23,r31,r32,r33\n";
  out.precision(17);
  for (const auto& e : log) {
    out << e.pose_index << ',' << e.repetition << ',' << (e.settled ? 1 : 0);
    for (int i = 0; i < 3; ++i) out << ',' << e.tip.position[i];
    for (int i = 0; i < 9; ++i) out << ',' << e.tip.rotation(i / 3, i % 3);
    out << '\n';
  }
}

std::vector<PoseLogEntry> read_pose_log(std::istream& in) {
  std::vector<PoseLogEntry> log;
  std::string line;
  if (!std::getline(in, line)) return log;  // header
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError("pose log line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    if (values.size() != 15) throw ConfigError("pose log line " + std::to_string(line_no) + ": expected 15 columns");
    PoseLogEntry e;
    e.pose_index = static_cast<std::size_t>(values[0]);
    e.repetition = static_cast<int>(values[1]);
    e.settled = values[2] != 0.0;
    e.tip.position = Eigen::Vector3d(values[3], values[4], values[5]);
    for (int i = 0; i < 9; ++i) e.tip.rotation(i / 3, i % 3) = values[6 + static_cast<std::size_t>(i)];
    log.push_back(e);
  }
  return log;
}

}  // namespace ctbot
