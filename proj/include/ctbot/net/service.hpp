#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ctbot/net/cockpit_server.hpp"
#include "ctbot/net/setpoint_server.hpp"
#include "ctbot/simulator.hpp"

namespace ctbot::net {

struct ServiceConfig {
  CockpitServerConfig cockpit;
  /// TCP setpoint server in front of the simulated controller; off when empty.
  std::optional<unsigned short> controller_port;
  std::string controller_address = "127.0.0.1";
  /// Fast mode: the clock only advances on cockpit "step" messages.
  bool fast = false;
  double telemetry_rate = 50.0;  // Hz of simulated time (realtime mode)
  /// Stop after this much simulated time (realtime mode).
  std::optional<double> duration;
  /// Every applied cockpit message is appended here as a trace line.
  std::optional<std::filesystem::path> record_path;
  /// Upper bound on the ticks a single step message may request.
  std::uint64_t max_step_ticks = 600'000;
};

/// The `serve` runtime: one loop thread owns the simulator; the cockpit
/// WebSocket and the TCP setpoint server feed it by message passing.
class TeleopService {
 public:
  TeleopService(RobotModel model, Scene scene, RobotBody body, SimulatorConfig sim_config, ServiceConfig config);
  ~TeleopService();

  TeleopService(const TeleopService&) = delete;
  TeleopService& operator=(const TeleopService&) = delete;

  void stop();
  /// Blocks until stopped (by stop(), or by the configured duration).
  void wait();
  bool running() const noexcept { return running_; }

  unsigned short cockpit_port() const noexcept { return cockpit_->port(); }
  std::optional<unsigned short> controller_port() const;
  /// Most recent telemetry snapshot (JSON text).
  std::string snapshot() const;

 private:
  struct Inbound {
    std::string text;
    CockpitServer::Reply reply;
  };

  void loop();
  void handle(Inbound& in);
  void publish();

  Simulator sim_;
  ServiceConfig config_;
  std::unique_ptr<std::ofstream> record_;

  mutable std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable stopped_;
  std::deque<Inbound> inbox_;
  bool controller_pending_ = false;
  std::string snapshot_;

  std::atomic<bool> running_{true};
  std::unique_ptr<CockpitServer> cockpit_;
  std::unique_ptr<SetpointServer> setpoints_;
  std::thread thread_;
};

}  // namespace ctbot::net
