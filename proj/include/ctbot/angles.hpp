#pragma once

#include <numbers>
#include <string_view>

namespace ctbot {

inline constexpr double kPi = std::numbers::pi;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Parses the angle notation used in model files: a plain number, or an
/// expression of the form `[-][k*]pi[/n]` (e.g. "pi/2", "-pi/2", "3*pi/4").
/// Throws ConfigError on anything else.
double parse_angle_expression(std::string_view text);

}  // namespace ctbot
