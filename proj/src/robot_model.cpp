#include "ctbot/robot_model.hpp"

#include <algorithm>
#include <fstream>

#include "ctbot/angles.hpp"
#include "ctbot/errors.hpp"

namespace ctbot {

using nlohmann::json;

namespace {

constexpr const char* kSchema = "ctbot-robot-model/1";

double angle_field(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_angle_expression(v.get<std::string>());
  throw ConfigError(std::string("field '") + key + "' must be a number or angle expression");
}

JointType parse_joint_type(const std::string& s) {
  if (s == "prismatic" || s == "p") return JointType::prismatic;
  if (s == "revolute" || s == "r") return JointType::revolute;
  if (s == "fixed" || s == "-") return JointType::fixed;
  throw ConfigError("unknown joint type '" + s + "'");
}

std::string joint_type_name(JointType t) {
  switch (t) {
    case JointType::prismatic: return "prismatic";
    case JointType::revolute: return "revolute";
    case JointType::fixed: return "fixed";
  }
  return "fixed";
}

JointVector vector7(const json& j, const char* what) {
  if (!j.is_array() || j.size() != kNumJoints) {
    throw ConfigError(std::string(what) + " must be an array of 7 numbers");
  }
  JointVector v;
  for (int i = 0; i < kNumJoints; ++i) v[i] = angle_field(json{{"v", j[i]}}, "v");
  return v;
}

CreepResistance parse_creep(const std::string& s) {
  if (s == "fair") return CreepResistance::fair;
  if (s == "good") return CreepResistance::good;
  if (s == "great") return CreepResistance::great;
  throw ConfigError("unknown creep resistance '" + s + "'");
}

Sourcing parse_sourcing(const std::string& s) {
  if (s == "easy") return Sourcing::easy;
  if (s == "ok") return Sourcing::ok;
  if (s == "difficult") return Sourcing::difficult;
  throw ConfigError("unknown sourcing '" + s + "'");
}

CableMaterial material_from_json(const json& j) {
  CableMaterial m;
  m.name = j.at("name").get<std::string>();
  m.tensile_modulus = j.at("tensile_modulus_pa").get<double>();
  m.tensile_strength = j.at("tensile_strength_pa").get<double>();
  m.dd_ratio = j.at("dd_ratio").get<double>();
  m.creep_resistance = parse_creep(j.at("creep_resistance").get<std::string>());
  m.sourcing = parse_sourcing(j.at("sourcing").get<std::string>());
  if (!(m.tensile_modulus > 0.0) || !(m.tensile_strength > 0.0)) {
    throw ConfigError("cable material '" + m.name + "' needs positive modulus and strength");
  }
  return m;
}

json material_to_json(const CableMaterial& m) {
  return {{"name", m.name},
          {"tensile_modulus_pa", m.tensile_modulus},
          {"tensile_strength_pa", m.tensile_strength},
          {"dd_ratio", m.dd_ratio},
          {"creep_resistance", to_string(m.creep_resistance)},
          {"sourcing", to_string(m.sourcing)}};
}

}  // namespace

DhTable default_dh_table() {
  const double half_pi = kPi / 2.0;
  return DhTable({
      {JointType::prismatic, 0.0, half_pi, 0.0, 0.0},
      {JointType::prismatic, 0.0, -half_pi, 0.0, 0.0},
      {JointType::revolute, 0.0, 0.0, 0.0, 0.0},
      {JointType::revolute, 0.0, half_pi, 0.0, half_pi},
      {JointType::revolute, 8e-2, half_pi, 0.0, 0.0},
      {JointType::revolute, 8e-2, half_pi, 0.0, -half_pi},
      {JointType::prismatic, 5.57e-2, -half_pi, 2.74e-2, 0.0},
      {JointType::fixed, 0.0, 0.0, 1.15e-1, half_pi},
  });
}

JointLimits default_joint_limits() {
  JointLimits limits;
  limits.lower << 0.0, 0.0, -kPi, -kPi / 2.0, -2.2, -2.2, 0.0;
  limits.upper << 0.3, 0.3, kPi, kPi / 2.0, 2.2, 2.2, 0.12;
  return limits;
}

MixingMatrix default_mixing_matrix() {
  MixingMatrix::Matrix m;
  // clang-format off
  m << 5.73e-3, 0,       0,    0,        0,       0,        0,
       0,       5.73e-3, 0,    0,        0,       0,        0,
       0,       0,       0.24, 0,        0,       0,        0,
       0,       0,       0,    0.45,     0,       0,        0,
       0,       0,       0,    -0.35,    0.45,    0,        0,
       0,       0,       0,    0.94,     -0.62,   0.79,     0,
       0,       0,       0,    -5.26e-3, 3.23e-3, -8.73e-3, 6.35e-3;
  // clang-format on
  return MixingMatrix(m);
}

RobotModel default_robot_model() {
  return {SerialChain{default_dh_table(), default_joint_limits()},
          default_mixing_matrix(),
          EncoderSpec{},
          default_cable_catalog(),
          default_cable_run(),
          LoadRating{},
          ThrustLevers{}};
}

RobotModel robot_model_from_json(const json& j) {
  try {
    if (j.value("schema", std::string{}) != kSchema) {
      throw ConfigError(std::string("robot model schema must be '") + kSchema + "'");
    }
    std::vector<DhRow> rows;
    for (const auto& r : j.at("dh")) {
      rows.push_back({parse_joint_type(r.at("type").get<std::string>()), r.at("a").get<double>(),
                      angle_field(r, "alpha"), r.at("d").get<double>(), angle_field(r, "theta")});
    }
    JointLimits limits{vector7(j.at("joint_limits").at("lower"), "joint_limits.lower"),
                       vector7(j.at("joint_limits").at("upper"), "joint_limits.upper")};
    for (int i = 0; i < kNumJoints; ++i) {
      if (!(limits.lower[i] <= limits.upper[i])) throw ConfigError("joint limits lower > upper");
    }

    const auto& mj = j.at("mixing_matrix");
    if (!mj.is_array() || mj.size() != kNumJoints) throw ConfigError("mixing_matrix must have 7 rows");
    MixingMatrix::Matrix mm;
    for (int r = 0; r < kNumJoints; ++r) {
      const JointVector row = vector7(mj[r], "mixing_matrix row");
      mm.row(r) = row.transpose();
    }

    EncoderSpec enc;
    enc.counts_per_motor_rev = j.at("encoder").at("counts_per_motor_rev").get<int>();
    enc.gear_ratio = j.at("encoder").at("gear_ratio").get<int>();
    if (enc.counts_per_motor_rev <= 0 || enc.gear_ratio <= 0) throw ConfigError("encoder values must be positive");

    std::vector<CableMaterial> catalog;
    for (const auto& m : j.at("cable_materials")) catalog.push_back(material_from_json(m));

    const auto& run = j.at("joint4_cable_run");
    const std::string material_name = run.at("material").get<std::string>();
    auto found = std::find_if(catalog.begin(), catalog.end(),
                              [&](const CableMaterial& m) { return m.name == material_name; });
    if (found == catalog.end()) throw ConfigError("cable run references unknown material '" + material_name + "'");
    CableRun cable{*found, run.at("free_length_m").get<double>(), run.at("cross_section_m2").get<double>(),
                   run.at("drive_pulley_radius_m").get<double>()};
    if (!(cable.free_length > 0.0) || !(cable.cross_section > 0.0) || !(cable.drive_pulley_radius > 0.0)) {
      throw ConfigError("cable run dimensions must be positive");
    }

    LoadRating rating;
    const auto& lr = j.at("load_rating");
    rating.bearing_static_rating = lr.at("bearing_static_rating_n").get<double>();
    rating.joint_torque_limits = lr.at("joint_torque_limits_nm").get<std::array<double, 3>>();
    rating.joint7_force_limit = lr.at("joint7_force_limit_n").get<double>();

    ThrustLevers levers;
    levers.joint4 = j.at("thrust_levers_m").at("joint4").get<double>();
    levers.joint5 = j.at("thrust_levers_m").at("joint5").get<double>();

    return {SerialChain{DhTable(std::move(rows)), limits}, MixingMatrix(mm), enc, std::move(catalog), cable, rating,
            levers};
  } catch (const json::exception& e) {
    throw ConfigError(std::string("robot model: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("robot model: ") + e.what());
  }
}

json robot_model_to_json(const RobotModel& model) {
  json dh = json::array();
  int frame = 1;
  for (const auto& r : model.chain.dh.rows()) {
    dh.push_back({{"frame", frame++},
                  {"type", joint_type_name(r.type)},
                  {"a", r.a},
                  {"alpha", r.alpha},
                  {"d", r.d_offset},
                  {"theta", r.theta_offset}});
  }
  auto vec = [](const JointVector& v) { return std::vector<double>(v.data(), v.data() + kNumJoints); };
  json mixing = json::array();
  for (int r = 0; r < kNumJoints; ++r) {
    mixing.push_back(vec(model.mixing.matrix().row(r).transpose()));
  }
  json catalog = json::array();
  for (const auto& m : model.cable_catalog) catalog.push_back(material_to_json(m));
  return {{"schema", kSchema},
          {"dh", dh},
          {"joint_limits", {{"lower", vec(model.chain.limits.lower)}, {"upper", vec(model.chain.limits.upper)}}},
          {"mixing_matrix", mixing},
          {"encoder",
           {{"counts_per_motor_rev", model.encoder.counts_per_motor_rev}, {"gear_ratio", model.encoder.gear_ratio}}},
          {"cable_materials", catalog},
          {"joint4_cable_run",
           {{"material", model.joint4_cable.material.name},
            {"free_length_m", model.joint4_cable.free_length},
            {"cross_section_m2", model.joint4_cable.cross_section},
            {"drive_pulley_radius_m", model.joint4_cable.drive_pulley_radius}}},
          {"load_rating",
           {{"bearing_static_rating_n", model.load_rating.bearing_static_rating},
            {"joint_torque_limits_nm", model.load_rating.joint_torque_limits},
            {"joint7_force_limit_n", model.load_rating.joint7_force_limit}}},
          {"thrust_levers_m", {{"joint4", model.thrust_levers.joint4}, {"joint5", model.thrust_levers.joint5}}}};
}

RobotModel load_robot_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open robot model file " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError("robot model " + path.string() + ": " + e.what());
  }
  return robot_model_from_json(j);
}

}  // namespace ctbot
