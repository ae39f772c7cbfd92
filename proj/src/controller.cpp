#include "ctbot/controller.hpp"

#include <algorithm>
#include <cmath>

#include "ctbot/controller_protocol.hpp"
#include "ctbot/errors.hpp"

namespace ctbot {

using nlohmann::json;

void PidGains::validate() const {
  if (!(kp >= 0.0) || !(ki >= 0.0) || !(kd >= 0.0) || !(output_limit > 0.0) || !(integral_limit > 0.0)) {
    throw InvalidArgument("PID gains must be >= 0 and limits > 0");
  }
}

double pid_step(const PidGains& gains, PidState& state, std::int64_t setpoint, std::int64_t measured, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("PID time step must be positive");
  const double error = static_cast<double>(setpoint - measured);
  state.integral = std::clamp(state.integral + error * dt, -gains.integral_limit, gains.integral_limit);
  const double derivative = state.primed ? (error - state.last_error) / dt : 0.0;
  state.last_error = error;
  state.primed = true;
  const double out = gains.kp * error + gains.ki * state.integral + gains.kd * derivative;
  return std::clamp(out, -gains.output_limit, gains.output_limit);
}

PlantState plant_step(const MotorPlantParams& params, PlantState state, double duty, double dt) {
  duty = std::clamp(duty, -1.0, 1.0);
  state.velocity += dt * (params.speed_gain * duty - state.velocity) / params.time_constant;
  state.position += dt * state.velocity;
  return state;
}

AxisCommands control_tick(std::array<AxisState, kNumAxes>& axes, const std::array<PidGains, kNumAxes>& gains,
                          SafetyState& safety, double t, double dt) {
  if (safety.enabled && t > safety.watchdog_deadline) {
    safety.enabled = false;
    safety.watchdog_tripped = true;
  }
  AxisCommands commands{};
  const bool active = safety.enabled && !safety.estop_latched;
  for (int i = 0; i < kNumAxes; ++i) {
    auto& axis = axes[static_cast<std::size_t>(i)];
    if (active) {
      axis.command = pid_step(gains[static_cast<std::size_t>(i)], axis.pid, axis.setpoint, axis.position, dt);
    } else {
      axis.command = 0.0;
      axis.pid = PidState{};
    }
    commands[static_cast<std::size_t>(i)] = axis.command;
  }
  return commands;
}

PidGains default_pid_gains() {
  PidGains g;
  g.kp = 2e-3;
  g.ki = 2e-2;
  g.kd = 1.8e-5;
  g.output_limit = 1.0;
  g.integral_limit = 0.1;
  return g;
}

ControllerConfig::ControllerConfig() {
  gains.fill(default_pid_gains());
  plants.fill(MotorPlantParams{});
  setpoint_min.fill(-1'000'000'000);
  setpoint_max.fill(1'000'000'000);
}

MotorController::MotorController(ControllerConfig config) : config_(std::move(config)) {
  for (const auto& g : config_.gains) g.validate();
  if (!(config_.dt > 0.0) || !(config_.watchdog_timeout > 0.0)) {
    throw InvalidArgument("controller period and watchdog timeout must be positive");
  }
}

std::string MotorController::handle_message(std::string_view line) {
  ControllerRequest request;
  try {
    request = parse_controller_request(line);
  } catch (const ProtocolError& e) {
    return error_reply("malformed", e.what());
  }

  return std::visit(
      [&](const auto& req) -> std::string {
        using T = std::decay_t<decltype(req)>;
        if constexpr (std::is_same_v<T, SetSetpoints>) {
          std::vector<AxisRejection> rejected;
          for (int i = 0; i < kNumAxes; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            const auto c = req.counts[idx];
            if (c < config_.setpoint_min[idx] || c > config_.setpoint_max[idx]) {
              rejected.push_back({i + 1, "setpoint " + std::to_string(c) + " outside [" +
                                             std::to_string(config_.setpoint_min[idx]) + ", " +
                                             std::to_string(config_.setpoint_max[idx]) + "]"});
            }
          }
          if (!rejected.empty()) return rejection_reply(rejected);
          for (std::size_t i = 0; i < kNumAxes; ++i) axes_[i].setpoint = req.counts[i];
          safety_.watchdog_deadline = time_ + config_.watchdog_timeout;
          return ok_reply("set_setpoints");
        } else if constexpr (std::is_same_v<T, Enable>) {
          safety_.estop_latched = false;
          safety_.watchdog_tripped = false;
          safety_.enabled = true;
          safety_.watchdog_deadline = time_ + config_.watchdog_timeout;
          // hold position until fresh setpoints arrive
          for (auto& a : axes_) {
            a.setpoint = a.position;
            a.pid = PidState{};
          }
          return ok_reply("enable");
        } else if constexpr (std::is_same_v<T, Disable>) {
          safety_.enabled = false;
          for (auto& a : axes_) a.command = 0.0;
          return ok_reply("disable");
        } else if constexpr (std::is_same_v<T, EStop>) {
          safety_.estop_latched = true;
          safety_.enabled = false;
          for (auto& a : axes_) a.command = 0.0;
          return ok_reply("estop");
        } else {
          return status().dump();
        }
      },
      request);
}

std::future<std::string> MotorController::submit(std::string line) {
  Pending p{std::move(line), {}, {}};
  auto fut = p.reply.get_future();
  std::lock_guard lock(queue_mutex_);
  queue_.push_back(std::move(p));
  return fut;
}

void MotorController::submit(std::string line, std::function<void(std::string)> on_reply) {
  std::lock_guard lock(queue_mutex_);
  queue_.push_back(Pending{std::move(line), {}, std::move(on_reply)});
}

void MotorController::drain_queue() {
  std::deque<Pending> batch;
  {
    std::lock_guard lock(queue_mutex_);
    batch.swap(queue_);
  }
  for (auto& p : batch) {
    std::string reply = handle_message(p.line);
    if (p.on_reply) {
      p.on_reply(std::move(reply));
    } else {
      p.reply.set_value(std::move(reply));
    }
  }
}

void MotorController::tick() {
  const auto wall_start = std::chrono::steady_clock::now();
  drain_queue();
  const AxisCommands commands = control_tick(axes_, config_.gains, safety_, time_, config_.dt);
  for (std::size_t i = 0; i < kNumAxes; ++i) {
    plant_states_[i] = plant_step(config_.plants[i], plant_states_[i], commands[i], config_.dt);
    axes_[i].position = std::llround(plant_states_[i].position);
    axes_[i].velocity = plant_states_[i].velocity;
  }
  ++ticks_;
  time_ = static_cast<double>(ticks_) * config_.dt;

  const double us =
      std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - wall_start).count();
  tick_us_total_ += us;
  tick_us_max_ = std::max(tick_us_max_, us);
}

void MotorController::run_ticks(std::uint64_t n) {
  for (std::uint64_t i = 0; i < n; ++i) tick();
}

void MotorController::reset_positions(const AxisCounts& counts) {
  for (std::size_t i = 0; i < kNumAxes; ++i) {
    plant_states_[i] = PlantState{static_cast<double>(counts[i]), 0.0};
    axes_[i].position = counts[i];
    axes_[i].velocity = 0.0;
    axes_[i].setpoint = counts[i];
    axes_[i].pid = PidState{};
  }
}

AxisCounts MotorController::positions() const {
  AxisCounts out{};
  for (std::size_t i = 0; i < kNumAxes; ++i) out[i] = axes_[i].position;
  return out;
}

AxisCommands MotorController::commands() const {
  AxisCommands out{};
  for (std::size_t i = 0; i < kNumAxes; ++i) out[i] = axes_[i].command;
  return out;
}

LoopStats MotorController::loop_stats() const {
  return {ticks_, ticks_ == 0 ? 0.0 : tick_us_total_ / static_cast<double>(ticks_), tick_us_max_};
}

json MotorController::status() const {
  json positions = json::array(), setpoints = json::array(), commands = json::array();
  for (const auto& a : axes_) {
    positions.push_back(a.position);
    setpoints.push_back(a.setpoint);
    commands.push_back(a.command);
  }
  const LoopStats stats = loop_stats();
  return {{"ok", true},
          {"cmd", "status"},
          {"tick", ticks_},
          {"time", time_},
          {"enabled", safety_.enabled},
          {"estop_latched", safety_.estop_latched},
          {"watchdog_tripped", safety_.watchdog_tripped},
          {"positions", positions},
          {"setpoints", setpoints},
          {"commands", commands},
          {"loop",
           {{"rate_hz", 1.0 / config_.dt},
            {"ticks", stats.ticks},
            {"mean_tick_us", stats.mean_tick_us},
            {"max_tick_us", stats.max_tick_us}}}};
}

}  // namespace ctbot
