#pragma once

#include <array>
#include <string>
#include <vector>

namespace ctbot {

enum class CreepResistance { fair, good, great };
enum class Sourcing { easy, ok, difficult };

struct CableMaterial {
  std::string name;
  double tensile_modulus = 0.0;   // Pa
  double tensile_strength = 0.0;  // Pa
  double dd_ratio = 0.0;          // minimum pulley : cable diameter
  CreepResistance creep_resistance = CreepResistance::fair;
  Sourcing sourcing = Sourcing::easy;
};

/// SK99, DM20, Vectran and stainless steel, in that order.
std::vector<CableMaterial> default_cable_catalog();

struct CableRun {
  CableMaterial material;
  double free_length = 0.0;          // L0, m
  double cross_section = 0.0;        // A, m^2
  double drive_pulley_radius = 0.0;  // r, m
};

/// Joint-4 cable run shipped with the default model. Geometry is calibrated,
/// not measured: SK99, r = 12 mm, A = 0.8 mm^2, L0 = 1.1 m.
CableRun default_cable_run();

struct LoadRating {
  double bearing_static_rating = 177.8;             // N
  std::array<double, 3> joint_torque_limits{2.49, 1.25, 1.25};  // N·m, joints 4, 5, 6
  double joint7_force_limit = 177.8;                // N
};

/// Lever arms of the needle thrust about joints 4 and 5 with the arm outstretched.
struct ThrustLevers {
  double joint4 = 0.16;  // m
  double joint5 = 0.08;  // m
};

/// Worst-case torques (joints 4, 5, 6) for a needle thrust F, with the sine
/// of the load angle maximized analytically.
std::array<double, 3> needle_torque_bounds(double thrust, const ThrustLevers& levers = {});

/// ΔL = F·L0 / (A·E).
double cable_elongation(double cable_force, const CableRun& run);

/// Joint rotation per unit joint torque, L0 / (2π·r²·A·E), in rad/(N·m).
double joint_compliance(const CableRun& run);

/// First-order tip stiffness at the given lever, in N/mm.
double endeffector_stiffness(const CableRun& run, double lever = 0.16);

/// Additive gravity torque allowance on the cable-driven joints.
inline constexpr double kGravityTorqueMargin = 0.011;  // N·m

struct LoadCheck {
  std::string item;  // "joint4", "joint5", "joint6", "joint7"
  double demand = 0.0;
  double limit = 0.0;
  bool pass = false;
};

struct LoadRatingReport {
  std::vector<LoadCheck> checks;
  bool all_pass() const;
};

/// Demands are compared against limits after adding `torque_margin` to every
/// joint torque.
LoadRatingReport check_load_rating(const std::array<double, 3>& torques, double needle_force,
                                   const LoadRating& rating = {}, double torque_margin = 0.0);

std::string to_string(CreepResistance c);
std::string to_string(Sourcing s);

}  // namespace ctbot
