#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <future>
#include <mutex>
#include <string>
#include <string_view>

#include <json.hpp>

namespace ctbot {

inline constexpr int kNumAxes = 8;
inline constexpr double kControlPeriod = 1e-3;  // 1 kHz

using AxisCounts = std::array<std::int64_t, kNumAxes>;
using AxisCommands = std::array<double, kNumAxes>;

struct PidGains {
  double kp = 0.0;  // duty per count
  double ki = 0.0;  // duty per count·s
  double kd = 0.0;  // duty per count/s
  double output_limit = 1.0;
  double integral_limit = 0.0;  // count·s

  void validate() const;
};

struct PidState {
  double integral = 0.0;
  double last_error = 0.0;
  bool primed = false;  // false until the first sample; suppresses derivative kick
};

/// Positional PID with derivative on error, clamped integral and output.
double pid_step(const PidGains& gains, PidState& state, std::int64_t setpoint, std::int64_t measured, double dt);

/// First-order velocity response of a geared DC motor, in encoder counts.
struct MotorPlantParams {
  double speed_gain = 10900.0 / 60.0 * 2000.0;  // counts/s at full duty (free speed)
  double time_constant = 0.02;                  // s
};

struct PlantState {
  double position = 0.0;  // counts, continuous
  double velocity = 0.0;  // counts/s
};

/// v' = (K·duty − v)/T_m, semi-implicit Euler.
PlantState plant_step(const MotorPlantParams& params, PlantState state, double duty, double dt);

struct AxisState {
  std::int64_t position = 0;  // encoder counts
  double velocity = 0.0;      // counts/s
  std::int64_t setpoint = 0;
  double command = 0.0;       // duty
  PidState pid;
};

struct SafetyState {
  double watchdog_deadline = 0.0;
  bool estop_latched = false;
  bool enabled = false;
  bool watchdog_tripped = false;
};

/// One control period. Zero commands (and disabled axes) on e-stop, when
/// disabled, or once the watchdog deadline has passed; PID otherwise.
AxisCommands control_tick(std::array<AxisState, kNumAxes>& axes, const std::array<PidGains, kNumAxes>& gains,
                          SafetyState& safety, double t, double dt = kControlPeriod);

/// Gains tuned for the default plant: 1000-count steps settle in ~30 ms without overshoot.
PidGains default_pid_gains();

struct ControllerConfig {
  std::array<PidGains, kNumAxes> gains;
  std::array<MotorPlantParams, kNumAxes> plants;
  double watchdog_timeout = 0.1;  // s
  double dt = kControlPeriod;
  /// Accepted setpoint range per axis, inclusive.
  std::array<std::int64_t, kNumAxes> setpoint_min;
  std::array<std::int64_t, kNumAxes> setpoint_max;

  ControllerConfig();
};

struct LoopStats {
  std::uint64_t ticks = 0;
  double mean_tick_us = 0.0;
  double max_tick_us = 0.0;
};

/// Emulated 8-axis motor controller: simulated plants, 1 kHz fixed-step loop,
/// watchdog, e-stop latch, and the line-delimited JSON setpoint protocol.
///
/// Messages passed to `submit` (any thread) are applied at the start of the
/// next tick in arrival order. `handle_message` applies a message immediately
/// and must only be called from the thread that drives `tick`.
class MotorController {
 public:
  explicit MotorController(ControllerConfig config = {});

  std::string handle_message(std::string_view line);
  std::future<std::string> submit(std::string line);
  /// As above; `on_reply` runs on the ticking thread.
  void submit(std::string line, std::function<void(std::string)> on_reply);
  /// Applies queued messages without advancing time.
  void drain_queue();

  void tick();
  void run_ticks(std::uint64_t n);
  /// Places every axis at rest at the given encoder positions (homing).
  void reset_positions(const AxisCounts& counts);

  double time() const noexcept { return time_; }
  std::uint64_t tick_count() const noexcept { return ticks_; }
  const std::array<AxisState, kNumAxes>& axes() const noexcept { return axes_; }
  const std::array<PlantState, kNumAxes>& plants() const noexcept { return plant_states_; }
  const SafetyState& safety() const noexcept { return safety_; }
  AxisCounts positions() const;
  AxisCommands commands() const;
  const ControllerConfig& config() const noexcept { return config_; }
  LoopStats loop_stats() const;

  nlohmann::json status() const;

 private:
  struct Pending {
    std::string line;
    std::promise<std::string> reply;
    std::function<void(std::string)> on_reply;
  };

  ControllerConfig config_;
  std::array<AxisState, kNumAxes> axes_{};
  std::array<PlantState, kNumAxes> plant_states_{};
  SafetyState safety_;
  double time_ = 0.0;
  std::uint64_t ticks_ = 0;

  double tick_us_total_ = 0.0;
  double tick_us_max_ = 0.0;

  std::mutex queue_mutex_;
  std::deque<Pending> queue_;
};

}  // namespace ctbot
