#include "ctbot/angles.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "ctbot/errors.hpp"

namespace ctbot {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool parse_number(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && std::isfinite(out);
}

}  // namespace

double parse_angle_expression(std::string_view text) {
  std::string_view s = trim(text);
  double value = 0.0;
  if (parse_number(s, value)) return value;

  double sign = 1.0;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    if (s.front() == '-') sign = -1.0;
    s = trim(s.substr(1));
  }
  const auto pi_pos = s.find("pi");
  if (pi_pos == std::string_view::npos) {
    throw ConfigError("malformed angle expression: '" + std::string(text) + "'");
  }
  double coefficient = 1.0;
  std::string_view head = trim(s.substr(0, pi_pos));
  if (!head.empty()) {
    if (head.back() != '*' || !parse_number(head.substr(0, head.size() - 1), coefficient)) {
      throw ConfigError("malformed angle expression: '" + std::string(text) + "'");
    }
  }
  double divisor = 1.0;
  std::string_view tail = trim(s.substr(pi_pos + 2));
  if (!tail.empty()) {
    if (tail.front() != '/' || !parse_number(tail.substr(1), divisor) || divisor == 0.0) {
      throw ConfigError("malformed angle expression: '" + std::string(text) + "'");
    }
  }
  return sign * coefficient * kPi / divisor;
}

}  // namespace ctbot
