#include "ctbot/simulator.hpp"

#include <cmath>
#include <fstream>
#include <istream>

#include "ctbot/controller_protocol.hpp"
#include "ctbot/errors.hpp"

namespace ctbot {

using nlohmann::json;

namespace {

Eigen::Vector3d vec3_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) return Eigen::Vector3d::Zero();
  if (!it->is_array() || it->size() != 3) throw ProtocolError(std::string("'") + key + "' must be 3 numbers");
  Eigen::Vector3d v;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!(*it)[i].is_number()) throw ProtocolError(std::string("'") + key + "' must be 3 numbers");
    v[static_cast<Eigen::Index>(i)] = (*it)[i].get<double>();
  }
  if (!v.allFinite()) throw ProtocolError(std::string("'") + key + "' must be finite");
  return v;
}

int direction_field(const json& j) {
  auto it = j.find("dir");
  if (it == j.end() || !it->is_number_integer()) throw ProtocolError("'dir' must be +1 or -1");
  const auto d = it->get<std::int64_t>();
  if (d != 1 && d != -1) throw ProtocolError("'dir' must be +1 or -1");
  return static_cast<int>(d);
}

json vec_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

json rotation_json(const Eigen::Matrix3d& r) {
  json out = json::array();
  for (int i = 0; i < 9; ++i) out.push_back(r(i / 3, i % 3));
  return out;
}

json joints_json(const JointVector& q) { return std::vector<double>(q.data(), q.data() + kNumJoints); }

}  // namespace

CockpitMessage parse_cockpit_message(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ProtocolError("message must be a JSON object");
  auto type_it = j.find("type");
  if (type_it == j.end() || !type_it->is_string()) throw ProtocolError("missing string field 'type'");
  const std::string type = type_it->get<std::string>();
  if (type == "input") return CockpitInput{vec3_field(j, "v"), vec3_field(j, "r")};
  if (type == "jog") return CockpitJog{direction_field(j)};
  if (type == "gamma") return CockpitGamma{direction_field(j)};
  if (type == "estop") return CockpitEStop{};
  if (type == "enable") return CockpitEnable{};
  if (type == "step") {
    auto it = j.find("ticks");
    if (it == j.end() || !it->is_number_unsigned()) throw ProtocolError("'ticks' must be a non-negative integer");
    return CockpitStep{it->get<std::uint64_t>()};
  }
  throw ProtocolError("unknown message type '" + type + "'");
}

json cockpit_message_to_json(const CockpitMessage& message) {
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CockpitInput>) {
          return {{"type", "input"}, {"v", vec_json(m.v)}, {"r", vec_json(m.r)}};
        } else if constexpr (std::is_same_v<T, CockpitJog>) {
          return {{"type", "jog"}, {"dir", m.direction}};
        } else if constexpr (std::is_same_v<T, CockpitGamma>) {
          return {{"type", "gamma"}, {"dir", m.direction}};
        } else if constexpr (std::is_same_v<T, CockpitEStop>) {
          return {{"type", "estop"}};
        } else if constexpr (std::is_same_v<T, CockpitEnable>) {
          return {{"type", "enable"}};
        } else {
          return {{"type", "step"}, {"ticks", m.ticks}};
        }
      },
      message);
}

std::vector<TraceEntry> parse_trace(std::istream& in) {
  std::vector<TraceEntry> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      if (!j.contains("tick") || !j.at("tick").is_number_unsigned()) throw ProtocolError("missing 'tick'");
      json msg = j;
      msg.erase("tick");
      out.push_back({j.at("tick").get<std::uint64_t>(), parse_cockpit_message(msg.dump())});
    } catch (const std::exception& e) {
      throw ProtocolError("trace line " + std::to_string(line_no) + ": " + e.what());
    }
    if (out.size() > 1 && out.back().tick < out[out.size() - 2].tick) {
      throw ProtocolError("trace line " + std::to_string(line_no) + ": ticks must be nondecreasing");
    }
  }
  return out;
}

std::vector<TraceEntry> load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace " + path.string());
  return parse_trace(in);
}

std::string trace_line(const TraceEntry& entry) {
  json j = cockpit_message_to_json(entry.message);
  j["tick"] = entry.tick;
  return j.dump();
}

Simulator::Simulator(RobotModel model, Scene scene, RobotBody body, SimulatorConfig config)
    : model_(std::move(model)),
      scene_(std::move(scene)),
      body_(std::move(body)),
      config_(std::move(config)),
      controller_(config_.controller),
      teleop_(make_teleop_state(model_.chain, config_.home)) {
  controller_.reset_positions(joints_to_setpoints(model_, config_.home));
  if (config_.auto_enable) controller_.handle_message(serialize_request(Enable{}));
}

std::optional<std::string> Simulator::apply(const CockpitMessage& message) {
  return std::visit(
      [&](const auto& m) -> std::optional<std::string> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CockpitInput>) {
          held_input_ = m;
        } else if constexpr (std::is_same_v<T, CockpitJog>) {
          pending_jog_ += m.direction;
        } else if constexpr (std::is_same_v<T, CockpitGamma>) {
          pending_gamma_ += m.direction;
        } else if constexpr (std::is_same_v<T, CockpitEStop>) {
          controller_.handle_message(serialize_request(EStop{}));
          held_input_ = {};
          pending_jog_ = pending_gamma_ = 0;
        } else if constexpr (std::is_same_v<T, CockpitEnable>) {
          controller_.handle_message(serialize_request(Enable{}));
          controller_link_ok_ = true;
          resync_to_measured();
        } else {
          return std::string("step messages are handled by the serving loop");
        }
        return std::nullopt;
      },
      message);
}

std::optional<std::string> Simulator::apply_line(std::string_view line) {
  try {
    return apply(parse_cockpit_message(line));
  } catch (const ProtocolError& e) {
    return std::string(e.what());
  }
}

bool Simulator::teleop_due() const noexcept { return 2 * control_ticks_ >= 5 * teleop_ticks_; }

void Simulator::step() {
  if (teleop_due()) {
    run_teleop_tick();
    ++teleop_ticks_;
  }
  controller_.tick();
  ++control_ticks_;
}

void Simulator::step(std::uint64_t ticks) {
  for (std::uint64_t i = 0; i < ticks; ++i) step();
}

JointVector Simulator::measured_joints() const {
  return setpoints_to_joints(model_, controller_.positions());
}

void Simulator::resync_to_measured() {
  const JointVector q = model_.chain.limits.clamp(measured_joints());
  const double gamma = teleop_.gamma;
  teleop_ = make_teleop_state(model_.chain, q, gamma);
}

void Simulator::run_teleop_tick() {
  const auto& safety = controller_.safety();
  if (!safety.enabled || safety.estop_latched || !controller_link_ok_) return;

  InputSample input;
  input.v = held_input_.v;
  input.r = held_input_.r;
  if (pending_gamma_ > 0) {
    input.gamma_up = true;
    --pending_gamma_;
  } else if (pending_gamma_ < 0) {
    input.gamma_down = true;
    ++pending_gamma_;
  }
  if (pending_jog_ > 0) {
    input.needle_jog = 1;
    --pending_jog_;
  } else if (pending_jog_ < 0) {
    input.needle_jog = -1;
    ++pending_jog_;
  }

  TeleopContext context{&model_, config_.teleop, &scene_, &body_};
  TeleopState candidate = teleop_;
  const TeleopTickResult result = teleop_tick(candidate, input, context);

  const std::string reply = controller_.handle_message(serialize_request(SetSetpoints{result.setpoints}));
  if (!json::parse(reply).value("ok", false)) {
    controller_link_ok_ = false;
    recent_events_ = {to_string(TeleopEvent::connection_lost)};
    return;
  }
  teleop_ = std::move(candidate);
  last_setpoints_ = result.setpoints;
  last_ik_ = result.ik;
  recent_events_.clear();
  for (TeleopEvent e : result.events) {
    recent_events_.push_back(to_string(e));
    if (e == TeleopEvent::rubber_band) ++rubber_band_events_;
    if (e == TeleopEvent::collision_guard) ++collision_guard_events_;
  }
}

std::vector<AxisCounts> Simulator::run_trace(const std::vector<TraceEntry>& trace, std::uint64_t teleop_ticks) {
  std::vector<AxisCounts> out;
  out.reserve(teleop_ticks);
  std::size_t next = 0;
  const std::uint64_t end = teleop_ticks_ + teleop_ticks;
  while (teleop_ticks_ < end) {
    if (teleop_due()) {
      while (next < trace.size() && trace[next].tick <= teleop_ticks_) {
        if (!std::holds_alternative<CockpitStep>(trace[next].message)) apply(trace[next].message);
        ++next;
      }
      const std::uint64_t before = teleop_ticks_;
      step();
      if (teleop_ticks_ != before) out.push_back(last_setpoints_.value_or(AxisCounts{}));
    } else {
      step();
    }
  }
  return out;
}

json Simulator::telemetry() const {
  const Pose tip = forward_kinematics(model_.chain, teleop_.q);
  const Pose tip_world = scene_.mounting * tip;
  json links = json::array();
  const auto posed = posed_links(scene_, body_, model_.chain, teleop_.q);
  for (std::size_t i = 0; i < posed.size(); ++i) {
    links.push_back({{"name", body_.links[i].name},
                     {"a", vec_json(posed[i].a)},
                     {"b", vec_json(posed[i].b)},
                     {"radius", posed[i].radius}});
  }
  const auto& safety = controller_.safety();
  json faults = json::array();
  if (safety.estop_latched) faults.push_back("estop");
  if (safety.watchdog_tripped) faults.push_back("watchdog");
  if (!safety.enabled) faults.push_back("disabled");
  if (!controller_link_ok_) faults.push_back("connection_lost");

  json residual = nullptr;
  if (last_ik_) residual = {{"position", last_ik_->position_residual}, {"orientation", last_ik_->orientation_residual}};

  return {{"type", "state"},
          {"schema", 1},
          {"tick", control_ticks_},
          {"teleop_tick", teleop_ticks_},
          {"time", controller_.time()},
          {"q", joints_json(teleop_.q)},
          {"q_measured", joints_json(measured_joints())},
          {"tip", {{"position", vec_json(tip.position)}, {"rotation", rotation_json(tip.rotation)}}},
          {"tip_world", {{"position", vec_json(tip_world.position)}, {"rotation", rotation_json(tip_world.rotation)}}},
          {"target",
           {{"position", vec_json(teleop_.target_position)}, {"rotation", rotation_json(teleop_.target_rotation)}}},
          {"gamma", teleop_.gamma},
          {"needle_extension", teleop_.needle_extension},
          {"residual", residual},
          {"enabled", safety.enabled},
          {"faults", faults},
          {"events", recent_events_},
          {"event_counts", {{"rubber_band", rubber_band_events_}, {"collision_guard", collision_guard_events_}}},
          {"links", links}};
}

}  // namespace ctbot
