#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ctbot/controller.hpp"
#include "ctbot/robot_model.hpp"
#include "ctbot/scene.hpp"
#include "ctbot/teleop.hpp"

namespace ctbot {

// Cockpit → server messages (one JSON object per line / WebSocket text frame).
struct CockpitInput {
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  Eigen::Vector3d r = Eigen::Vector3d::Zero();
};
struct CockpitJog {
  int direction = 0;
};
struct CockpitGamma {
  int direction = 0;
};
struct CockpitEStop {};
struct CockpitEnable {};
/// Advances a --fast simulation by `ticks` control periods (1 ms each).
struct CockpitStep {
  std::uint64_t ticks = 0;
};

using CockpitMessage = std::variant<CockpitInput, CockpitJog, CockpitGamma, CockpitEStop, CockpitEnable, CockpitStep>;

/// Throws ProtocolError.
CockpitMessage parse_cockpit_message(std::string_view line);
nlohmann::json cockpit_message_to_json(const CockpitMessage& message);

/// One line of an input-trace file: a cockpit message stamped with the
/// teleop tick index before which it is applied.
struct TraceEntry {
  std::uint64_t tick = 0;
  CockpitMessage message;
};

std::vector<TraceEntry> parse_trace(std::istream& in);
std::vector<TraceEntry> load_trace(const std::filesystem::path& path);
std::string trace_line(const TraceEntry& entry);

struct SimulatorConfig {
  TeleopConfig teleop;
  ControllerConfig controller;
  JointVector home = JointVector::Zero();
  /// Enable the controller at start-up.
  bool auto_enable = true;
};

/// Controller (1 kHz) plus teleop loop (400 Hz) on one simulated clock.
/// Teleop tick m runs during control tick ceil(2.5·m). Setpoints reach the
/// controller through its line protocol.
class Simulator {
 public:
  Simulator(RobotModel model, Scene scene, RobotBody body, SimulatorConfig config = {});

  /// Applies a cockpit message; returns an error description for invalid
  /// input. Step messages are not handled here (the caller owns the clock).
  std::optional<std::string> apply(const CockpitMessage& message);
  std::optional<std::string> apply_line(std::string_view line);

  /// One control period.
  void step();
  void step(std::uint64_t ticks);
  /// True when the next `step()` runs a teleop tick.
  bool teleop_due() const noexcept;

  /// Replays a trace for `teleop_ticks` teleop ticks; returns the setpoints
  /// produced by every teleop tick.
  std::vector<AxisCounts> run_trace(const std::vector<TraceEntry>& trace, std::uint64_t teleop_ticks);

  nlohmann::json telemetry() const;

  const TeleopState& teleop_state() const noexcept { return teleop_; }
  const MotorController& controller() const noexcept { return controller_; }
  /// Thread-safe path to the controller's setpoint protocol (applied between ticks).
  MotorController& controller_port() noexcept { return controller_; }
  const RobotModel& model() const noexcept { return model_; }
  const Scene& scene() const noexcept { return scene_; }
  const RobotBody& body() const noexcept { return body_; }
  std::uint64_t control_ticks() const noexcept { return control_ticks_; }
  std::uint64_t teleop_ticks() const noexcept { return teleop_ticks_; }
  const std::optional<AxisCounts>& last_setpoints() const noexcept { return last_setpoints_; }
  const std::optional<IkReport>& last_ik() const noexcept { return last_ik_; }
  /// Joint vector implied by the controller's encoder readings.
  JointVector measured_joints() const;

 private:
  void run_teleop_tick();
  void resync_to_measured();

  RobotModel model_;
  Scene scene_;
  RobotBody body_;
  SimulatorConfig config_;
  MotorController controller_;
  TeleopState teleop_;

  CockpitInput held_input_;
  int pending_jog_ = 0;
  int pending_gamma_ = 0;

  std::uint64_t control_ticks_ = 0;
  std::uint64_t teleop_ticks_ = 0;
  std::optional<AxisCounts> last_setpoints_;
  std::optional<IkReport> last_ik_;
  std::vector<std::string> recent_events_;
  std::uint64_t rubber_band_events_ = 0;
  std::uint64_t collision_guard_events_ = 0;
  bool controller_link_ok_ = true;
};

}  // namespace ctbot
