#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ctbot/controller.hpp"

namespace ctbot {

// Wire format: one JSON object per line (UTF-8, '\n' terminated), requests
// carry a "cmd" field. See docs/protocol.md.

struct SetSetpoints {
  AxisCounts counts{};
};
struct Enable {};
struct Disable {};
struct EStop {};
struct StatusQuery {};

using ControllerRequest = std::variant<SetSetpoints, Enable, Disable, EStop, StatusQuery>;

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws ProtocolError on malformed input.
ControllerRequest parse_controller_request(std::string_view line);

std::string serialize_request(const ControllerRequest& request);

struct AxisRejection {
  int axis = 0;  // 1-based
  std::string reason;
};

std::string ok_reply(std::string_view cmd);
std::string error_reply(std::string_view error, std::string_view detail);
std::string rejection_reply(const std::vector<AxisRejection>& rejections);

}  // namespace ctbot
