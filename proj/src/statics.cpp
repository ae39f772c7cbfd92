#include "ctbot/statics.hpp"

#include <algorithm>
#include <cmath>

#include "ctbot/angles.hpp"
#include "ctbot/errors.hpp"

namespace ctbot {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(what) + " must be positive");
}

}  // namespace

std::vector<CableMaterial> default_cable_catalog() {
  return {
      {"SK99", 155e9, 4.1e9, 5.0, CreepResistance::fair, Sourcing::easy},
      {"DM20", 94e9, 3.4e9, 8.0, CreepResistance::great, Sourcing::difficult},
      {"Vectran", 103e9, 3e9, 8.0, CreepResistance::good, Sourcing::ok},
      {"SS", 210e9, 2e9, 18.0, CreepResistance::great, Sourcing::easy},
  };
}

CableRun default_cable_run() {
  return {default_cable_catalog().front(), 1.1, 0.8e-6, 12e-3};
}

std::array<double, 3> needle_torque_bounds(double thrust, const ThrustLevers& levers) {
  if (!(thrust >= 0.0) || !std::isfinite(thrust)) throw InvalidArgument("needle thrust must be >= 0");
  // max over the load angle of sin(x) is 1
  return {levers.joint4 * thrust, levers.joint5 * thrust, 0.0};
}

double cable_elongation(double cable_force, const CableRun& run) {
  if (!(cable_force >= 0.0) || !std::isfinite(cable_force)) throw InvalidArgument("cable force must be >= 0");
  require_positive(run.cross_section, "cable cross-section");
  require_positive(run.material.tensile_modulus, "tensile modulus");
  require_positive(run.free_length, "cable free length");
  return cable_force * run.free_length / (run.cross_section * run.material.tensile_modulus);
}

double joint_compliance(const CableRun& run) {
  require_positive(run.drive_pulley_radius, "drive pulley radius");
  const double r = run.drive_pulley_radius;
  // unit torque -> tension 1/r -> elongation -> rotation ΔL/(2πr)
  return cable_elongation(1.0 / r, run) / (2.0 * kPi * r);
}

double endeffector_stiffness(const CableRun& run, double lever) {
  require_positive(lever, "lever");
  const double newton_per_meter = 1.0 / (lever * lever * joint_compliance(run));
  return newton_per_meter * 1e-3;
}

bool LoadRatingReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const LoadCheck& c) { return c.pass; });
}

LoadRatingReport check_load_rating(const std::array<double, 3>& torques, double needle_force,
                                   const LoadRating& rating, double torque_margin) {
  LoadRatingReport report;
  static constexpr const char* kNames[] = {"joint4", "joint5", "joint6"};
  for (std::size_t i = 0; i < torques.size(); ++i) {
    const double demand = std::abs(torques[i]) + torque_margin;
    const double limit = rating.joint_torque_limits[i];
    report.checks.push_back({kNames[i], demand, limit, demand <= limit});
  }
  const double force = std::abs(needle_force);
  report.checks.push_back({"joint7", force, rating.joint7_force_limit, force <= rating.joint7_force_limit});
  return report;
}

std::string to_string(CreepResistance c) {
  switch (c) {
    case CreepResistance::fair: return "fair";
    case CreepResistance::good: return "good";
    case CreepResistance::great: return "great";
  }
  return "?";
}

std::string to_string(Sourcing s) {
  switch (s) {
    case Sourcing::easy: return "easy";
    case Sourcing::ok: return "ok";
    case Sourcing::difficult: return "difficult";
  }
  return "?";
}

}  // namespace ctbot
