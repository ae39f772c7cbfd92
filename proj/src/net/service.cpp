#include "ctbot/net/service.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "ctbot/controller_protocol.hpp"
#include "ctbot/errors.hpp"

namespace ctbot::net {

using nlohmann::json;

namespace {

std::string error_frame(const std::string& detail) { return json{{"type", "error"}, {"detail", detail}}.dump(); }

}  // namespace

TeleopService::TeleopService(RobotModel model, Scene scene, RobotBody body, SimulatorConfig sim_config,
                             ServiceConfig config)
    : sim_(std::move(model), std::move(scene), std::move(body), std::move(sim_config)), config_(std::move(config)) {
  if (!(config_.telemetry_rate > 0.0)) throw InvalidArgument("telemetry rate must be positive");
  if (config_.record_path) {
    record_ = std::make_unique<std::ofstream>(*config_.record_path);
    if (!*record_) throw IoError("cannot write trace " + config_.record_path->string());
  }
  snapshot_ = sim_.telemetry().dump();

  cockpit_ = std::make_unique<CockpitServer>(
      config_.cockpit,
      [this](std::string text, CockpitServer::Reply reply) {
        {
          std::lock_guard lock(mutex_);
          inbox_.push_back({std::move(text), std::move(reply)});
        }
        wake_.notify_one();
      },
      [this] { return snapshot(); });

  if (config_.controller_port) {
    setpoints_ = std::make_unique<SetpointServer>(
        [this](std::string line, SetpointServer::Reply reply) {
          sim_.controller_port().submit(std::move(line), std::move(reply));
          {
            std::lock_guard lock(mutex_);
            controller_pending_ = true;
          }
          wake_.notify_one();
        },
        config_.controller_address, *config_.controller_port);
  }
  thread_ = std::thread([this] { loop(); });
}

TeleopService::~TeleopService() { stop(); }

std::optional<unsigned short> TeleopService::controller_port() const {
  if (!setpoints_) return std::nullopt;
  return setpoints_->port();
}

std::string TeleopService::snapshot() const {
  std::lock_guard lock(mutex_);
  return snapshot_;
}

void TeleopService::stop() {
  {
    std::lock_guard lock(mutex_);
    running_ = false;
  }
  wake_.notify_all();
  stopped_.notify_all();
  if (thread_.joinable()) thread_.join();
  // answer anything still queued before the sockets go away
  sim_.controller_port().drain_queue();
  if (setpoints_) setpoints_->stop();
  if (cockpit_) cockpit_->stop();
}

void TeleopService::wait() {
  std::unique_lock lock(mutex_);
  stopped_.wait(lock, [this] { return !running_; });
}

void TeleopService::publish() {
  std::string text = sim_.telemetry().dump();
  {
    std::lock_guard lock(mutex_);
    snapshot_ = text;
  }
  cockpit_->broadcast(std::move(text));
}

void TeleopService::handle(Inbound& in) {
  CockpitMessage message;
  try {
    message = parse_cockpit_message(in.text);
  } catch (const ProtocolError& e) {
    in.reply(error_frame(e.what()));
    return;
  }
  if (const auto* step = std::get_if<CockpitStep>(&message)) {
    if (!config_.fast) {
      in.reply(error_frame("step is only accepted in fast mode"));
      return;
    }
    if (step->ticks > config_.max_step_ticks) {
      in.reply(error_frame("step exceeds " + std::to_string(config_.max_step_ticks) + " ticks"));
      return;
    }
    sim_.step(step->ticks);
    publish();
    return;
  }
  if (record_) *record_ << trace_line({sim_.teleop_ticks(), message}) << '\n' << std::flush;
  if (auto error = sim_.apply(message)) in.reply(error_frame(*error));
  if (config_.fast) publish();
}

void TeleopService::loop() {
  using clock = std::chrono::steady_clock;
  const double dt = sim_.controller().config().dt;
  const auto period = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(dt));
  const auto publish_every =
      std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(1.0 / (config_.telemetry_rate * dt))));
  auto next = clock::now();

  while (running_) {
    std::deque<Inbound> batch;
    {
      std::unique_lock lock(mutex_);
      if (config_.fast) {
        wake_.wait(lock, [this] { return !running_ || !inbox_.empty() || controller_pending_; });
      }
      batch.swap(inbox_);
      controller_pending_ = false;
    }
    if (!running_) break;
    if (config_.fast) sim_.controller_port().drain_queue();
    for (auto& in : batch) handle(in);
    if (config_.fast) continue;

    sim_.step();
    if (sim_.control_ticks() % publish_every == 0) publish();
    if (config_.duration && static_cast<double>(sim_.control_ticks()) * dt >= *config_.duration) {
      publish();
      {
        std::lock_guard lock(mutex_);
        running_ = false;
      }
      stopped_.notify_all();
      break;
    }
    next += period;
    const auto now = clock::now();
    if (now - next > std::chrono::milliseconds(100)) next = now;  // fell behind; do not try to catch up
    std::this_thread::sleep_until(next);
  }
}

}  // namespace ctbot::net
