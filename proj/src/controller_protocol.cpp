#include "ctbot/controller_protocol.hpp"

namespace ctbot {

using nlohmann::json;

ControllerRequest parse_controller_request(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ProtocolError("request must be a JSON object");
  auto cmd_it = j.find("cmd");
  if (cmd_it == j.end() || !cmd_it->is_string()) throw ProtocolError("missing string field 'cmd'");
  const std::string cmd = cmd_it->get<std::string>();

  if (cmd == "set_setpoints") {
    auto counts = j.find("counts");
    if (counts == j.end() || !counts->is_array() || counts->size() != kNumAxes) {
      throw ProtocolError("set_setpoints needs 'counts': array of 8 integers");
    }
    SetSetpoints req;
    for (std::size_t i = 0; i < kNumAxes; ++i) {
      const auto& c = (*counts)[i];
      if (!c.is_number_integer()) throw ProtocolError("counts[" + std::to_string(i) + "] is not an integer");
      req.counts[i] = c.get<std::int64_t>();
    }
    return req;
  }
  if (cmd == "enable") return Enable{};
  if (cmd == "disable") return Disable{};
  if (cmd == "estop") return EStop{};
  if (cmd == "status") return StatusQuery{};
  throw ProtocolError("unknown cmd '" + cmd + "'");
}

std::string serialize_request(const ControllerRequest& request) {
  return std::visit(
      [](const auto& req) -> std::string {
        using T = std::decay_t<decltype(req)>;
        if constexpr (std::is_same_v<T, SetSetpoints>) {
          return json{{"cmd", "set_setpoints"}, {"counts", req.counts}}.dump();
        } else if constexpr (std::is_same_v<T, Enable>) {
          return R"({"cmd":"enable"})";
        } else if constexpr (std::is_same_v<T, Disable>) {
          return R"({"cmd":"disable"})";
        } else if constexpr (std::is_same_v<T, EStop>) {
          return R"({"cmd":"estop"})";
        } else {
          return R"({"cmd":"status"})";
        }
      },
      request);
}

std::string ok_reply(std::string_view cmd) { return json{{"ok", true}, {"cmd", cmd}}.dump(); }

std::string error_reply(std::string_view error, std::string_view detail) {
  return json{{"ok", false}, {"error", error}, {"detail", detail}}.dump();
}

std::string rejection_reply(const std::vector<AxisRejection>& rejections) {
  json axes = json::array();
  for (const auto& r : rejections) axes.push_back({{"axis", r.axis}, {"reason", r.reason}});
  return json{{"ok", false}, {"error", "out_of_range"}, {"axes", axes}}.dump();
}

}  // namespace ctbot
