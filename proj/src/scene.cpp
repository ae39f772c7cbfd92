#include "ctbot/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ctbot/angles.hpp"
#include "ctbot/errors.hpp"

namespace ctbot {

using nlohmann::json;

namespace {

constexpr const char* kSchema = "ctbot-scene/1";

Capsule transform(const Pose& pose, const Capsule& c) {
  return {pose.transform_point(c.a), pose.transform_point(c.b), c.radius};
}

Eigen::Vector3d vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("expected a 3-vector");
  Eigen::Vector3d v(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
  if (!v.allFinite()) throw ConfigError("non-finite vector");
  return v;
}

json vec3_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

/// Rotation whose z column is `axis`.
Eigen::Matrix3d frame_from_axis(const Eigen::Vector3d& axis) {
  const Eigen::Vector3d z = axis.normalized();
  const Eigen::Vector3d helper = std::abs(z.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  const Eigen::Vector3d y = z.cross(helper).normalized();
  const Eigen::Vector3d x = y.cross(z);
  Eigen::Matrix3d r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return r;
}

Pose pose_from_json(const json& j) {
  Pose p;
  p.position = vec3(j.at("position"));
  if (j.contains("rotation")) {
    const auto& r = j.at("rotation");
    if (!r.is_array() || r.size() != 9) throw ConfigError("rotation must be 9 numbers, row-major");
    for (int i = 0; i < 9; ++i) p.rotation(i / 3, i % 3) = r[i].get<double>();
  } else if (j.contains("rpy")) {
    const Eigen::Vector3d rpy = vec3(j.at("rpy"));
    p.rotation = rot_x(rpy.x()) * rot_y(rpy.y()) * rot_z(rpy.z());
  }
  if (p.orthonormality_error() > 1e-9 || p.rotation.determinant() < 0.0) {
    throw ConfigError("pose rotation is not a proper rotation");
  }
  return p;
}

json pose_to_json(const Pose& p) {
  json r = json::array();
  for (int i = 0; i < 9; ++i) r.push_back(p.rotation(i / 3, i % 3));
  return {{"position", vec3_json(p.position)}, {"rotation", r}};
}

Capsule capsule_from_json(const json& j) {
  Capsule c{vec3(j.at("a")), vec3(j.at("b")), j.at("radius").get<double>()};
  if (!(c.radius > 0.0)) throw ConfigError("capsule radius must be positive");
  return c;
}

json capsule_json(const std::string& name, const Capsule& c) {
  return {{"name", name}, {"a", vec3_json(c.a)}, {"b", vec3_json(c.b)}, {"radius", c.radius}};
}

constexpr double kBoreLength = 1.0;

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> RobotBody::adjacent_pairs() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i + 1 < links.size(); ++i) out.emplace_back(i, i + 1);
  return out;
}

RobotBody RobotBody::inflated(double delta) const {
  RobotBody out = *this;
  for (auto& l : out.links) l.shape.radius += delta;
  return out;
}

Scene default_scene() {
  Scene s;
  s.bore = Bore{Pose::identity(), 0.325, kBoreLength};

  // Patient lies supine on the table along the bore axis, head toward the robot.
  const double table_top = -0.13;
  s.table = Box{{Eigen::Vector3d(0.0, table_top - 0.06, 0.6), Eigen::Matrix3d::Identity()},
                Eigen::Vector3d(0.2, 0.06, 1.2)};
  s.patient = {
      {"torso", {{0.0, table_top + 0.14, 0.40}, {0.0, table_top + 0.14, 0.95}, 0.14}},
      {"head", {{0.0, table_top + 0.09, 0.15}, {0.0, table_top + 0.09, 0.22}, 0.09}},
      {"arm_left", {{0.20, table_top + 0.05, 0.30}, {0.20, table_top + 0.05, 0.95}, 0.05}},
      {"arm_right", {{-0.20, table_top + 0.05, 0.30}, {-0.20, table_top + 0.05, 0.95}, 0.05}},
      {"legs", {{0.0, table_top + 0.09, 1.05}, {0.0, table_top + 0.09, 1.85}, 0.09}},
  };
  // Trunnion above the head. The stage moves in the frontal plane: q1 across
  // the patient (toward -x), q2 into the bore.
  s.mounting = Pose{Eigen::Vector3d(0.15, 0.20, 0.10), rot_z(-kPi / 2.0)};
  s.patient_vertices = anterior_surface_vertices(s.patient.front().shape, 0.01);
  s.lung_region = AxisAlignedRegion{{-0.14, table_top + 0.14, 0.42}, {0.14, 0.2, 0.65}};
  return s;
}

RobotBody default_robot_body() {
  RobotBody b;
  b.links = {
      {"boom", 3, {{0.0, 0.0, -0.6}, {0.0, 0.0, 0.0}, 0.02}, true},
      {"link4", 4, {{0.0, 0.0, 0.0}, {8e-2, 0.0, 0.0}, 0.02}, true},
      {"link5", 5, {{0.0, 0.0, 0.0}, {8e-2, 0.0, 0.0}, 0.02}, true},
      {"link6", 6, {{0.0, 0.0, 0.0}, {5.57e-2, 0.0, 0.0}, 0.015}, true},
      {"driver", 6, {{5.57e-2, 0.0, 0.0}, {5.57e-2, 2.74e-2, 0.0}, 0.012}, true},
      {"needle", 7, {{0.0, 0.0, 0.0}, {0.0, 0.0, 1.15e-1}, 6e-4}, true},
  };
  return b;
}

std::vector<Capsule> posed_links(const Scene& scene, const RobotBody& body, const SerialChain& chain,
                                 const JointVector& q) {
  const auto frames = frame_poses(chain, q);
  std::vector<Capsule> out;
  out.reserve(body.links.size());
  for (const auto& link : body.links) {
    if (link.frame < 0 || link.frame > kNumFrames) throw InvalidArgument("link frame out of range");
    out.push_back(transform(scene.mounting * frames[static_cast<std::size_t>(link.frame)], link.shape));
  }
  return out;
}

std::optional<double> bore_penetration(const Capsule& capsule, const Bore& bore) {
  const Pose to_bore = bore.frame.inverse();
  Eigen::Vector3d a = to_bore.transform_point(capsule.a);
  Eigen::Vector3d b = to_bore.transform_point(capsule.b);
  if (a.z() > b.z()) std::swap(a, b);
  if (b.z() < 0.0 || a.z() > bore.length) return std::nullopt;
  const double dz = b.z() - a.z();
  auto at = [&](double z) -> Eigen::Vector3d {
    if (dz <= 0.0) return a;
    return a + (b - a) * ((z - a.z()) / dz);
  };
  const Eigen::Vector3d lo = a.z() < 0.0 ? at(0.0) : a;
  const Eigen::Vector3d hi = b.z() > bore.length ? at(bore.length) : b;
  // radial distance is convex along a line, so its maximum is at an endpoint
  const double radial = std::max(lo.head<2>().norm(), hi.head<2>().norm());
  return radial + capsule.radius - bore.inner_radius;
}

double box_penetration(const Capsule& capsule, const Box& box) {
  const Pose to_box = box.frame.inverse();
  return capsule.radius -
         segment_box_distance(to_box.transform_point(capsule.a), to_box.transform_point(capsule.b), box.half_extents);
}

namespace {

/// Visits every colliding pair; stops early when the visitor returns false.
template <typename Visitor>
void visit_collisions(const Scene& scene, const RobotBody& body, const std::vector<Capsule>& links, Visitor&& visit) {
  const std::size_t n = links.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Capsule& link = links[i];
    for (std::size_t k = 0; k < scene.patient.size(); ++k) {
      const double depth = capsule_penetration(link, scene.patient[k].shape);
      if (depth > 0.0 && !visit("link:" + body.links[i].name, "patient:" + scene.patient[k].name, depth)) return;
    }
    if (scene.bore) {
      if (auto depth = bore_penetration(link, *scene.bore); depth && *depth > 0.0) {
        if (!visit("link:" + body.links[i].name, "bore", *depth)) return;
      }
    }
    if (scene.table) {
      const double depth = box_penetration(link, *scene.table);
      if (depth > 0.0 && !visit("link:" + body.links[i].name, "table", depth)) return;
    }
    for (std::size_t j = i + 2; j < n; ++j) {
      const double depth = capsule_penetration(link, links[j]);
      if (depth > 0.0 && !visit("link:" + body.links[i].name, "link:" + body.links[j].name, depth)) return;
    }
  }
}

}  // namespace

CollisionReport check_collision(const Scene& scene, const RobotBody& body, const SerialChain& chain,
                                const JointVector& q) {
  CollisionReport report;
  const auto links = posed_links(scene, body, chain, q);
  visit_collisions(scene, body, links, [&](std::string a, std::string b, double depth) {
    report.pairs.push_back({std::move(a), std::move(b), depth});
    return true;
  });
  report.in_collision = !report.pairs.empty();
  return report;
}

bool is_collision_free(const Scene& scene, const RobotBody& body, const SerialChain& chain, const JointVector& q) {
  bool free = true;
  visit_collisions(scene, body, posed_links(scene, body, chain, q), [&](auto&&...) { return free = false; });
  return free;
}

CrossSection frontal_cross_section(const Scene& scene, const RobotBody& body, const SerialChain& chain,
                                   const JointVector& q) {
  const auto links = posed_links(scene, body, chain, q);
  const Pose to_bore = scene.bore ? scene.bore->frame.inverse() : Pose::identity();
  Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector2d hi = -lo;
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (!body.links[i].in_bore) continue;
    for (const auto& p : {links[i].a, links[i].b}) {
      const Eigen::Vector2d xy = to_bore.transform_point(p).head<2>();
      lo = lo.cwiseMin(xy - Eigen::Vector2d::Constant(links[i].radius));
      hi = hi.cwiseMax(xy + Eigen::Vector2d::Constant(links[i].radius));
    }
  }
  if (!lo.allFinite()) return {};
  return {hi.x() - lo.x(), hi.y() - lo.y()};
}

std::vector<Eigen::Vector3d> anterior_surface_vertices(const Capsule& capsule, double spacing) {
  if (!(spacing > 0.0)) throw InvalidArgument("vertex spacing must be positive");
  Eigen::Vector3d a = capsule.a, b = capsule.b;
  if (a.z() > b.z()) std::swap(a, b);
  const double length = b.z() - a.z();
  const int n_axial = std::max(1, static_cast<int>(std::floor(length / spacing)) + 1);
  const int n_arc = std::max(1, static_cast<int>(std::floor(kPi * capsule.radius / spacing)) + 1);
  std::vector<Eigen::Vector3d> out;
  out.reserve(static_cast<std::size_t>(n_axial * n_arc));
  for (int i = 0; i < n_axial; ++i) {
    const double z = a.z() + (n_axial == 1 ? 0.0 : length * i / (n_axial - 1));
    for (int k = 0; k < n_arc; ++k) {
      const double phi = n_arc == 1 ? kPi / 2.0 : kPi * k / (n_arc - 1);
      out.emplace_back(a.x() + capsule.radius * std::cos(phi), a.y() + capsule.radius * std::sin(phi), z);
    }
  }
  return out;
}

RobotBody robot_body_from_json(const json& j) {
  RobotBody body;
  for (const auto& l : j) {
    LinkCapsule link;
    link.name = l.at("name").get<std::string>();
    link.frame = l.at("frame").get<int>();
    if (link.frame < 0 || link.frame > kNumFrames) throw ConfigError("link frame must be in 0..8");
    link.shape = capsule_from_json(l);
    link.in_bore = l.value("in_bore", true);
    body.links.push_back(std::move(link));
  }
  return body;
}

Scene scene_from_json(const json& j, const std::filesystem::path& base_dir) {
  try {
    if (j.value("schema", std::string{}) != kSchema) {
      throw ConfigError(std::string("scene schema must be '") + kSchema + "'");
    }
    Scene s;
    if (j.contains("bore") && !j.at("bore").is_null()) {
      const auto& b = j.at("bore");
      Bore bore;
      bore.frame.position = vec3(b.at("origin"));
      bore.frame.rotation = frame_from_axis(vec3(b.at("axis")));
      bore.inner_radius = b.at("inner_radius").get<double>();
      bore.length = b.at("length").get<double>();
      if (!(bore.inner_radius > 0.0) || !(bore.length > 0.0)) throw ConfigError("bore dimensions must be positive");
      s.bore = bore;
    }
    if (j.contains("table") && !j.at("table").is_null()) {
      const auto& t = j.at("table");
      s.table = Box{{vec3(t.at("center")), Eigen::Matrix3d::Identity()}, vec3(t.at("half_extents"))};
    }
    for (const auto& p : j.value("patient", json::array())) {
      s.patient.push_back({p.at("name").get<std::string>(), capsule_from_json(p)});
    }
    if (j.contains("mounting")) s.mounting = pose_from_json(j.at("mounting"));
    if (j.contains("lung_region") && !j.at("lung_region").is_null()) {
      s.lung_region = AxisAlignedRegion{vec3(j.at("lung_region").at("min")), vec3(j.at("lung_region").at("max"))};
    }
    if (j.contains("patient_vertices") && !j.at("patient_vertices").is_null()) {
      const auto& v = j.at("patient_vertices");
      if (v.is_array()) {
        for (const auto& p : v) s.patient_vertices.push_back(vec3(p));
      } else if (v.contains("file")) {
        std::filesystem::path file = v.at("file").get<std::string>();
        if (file.is_relative()) file = base_dir / file;
        s.patient_vertices = load_vertex_list(file);
      } else if (v.contains("generate")) {
        const auto& g = v.at("generate");
        const std::string from = g.at("capsule").get<std::string>();
        auto it = std::find_if(s.patient.begin(), s.patient.end(), [&](const auto& c) { return c.name == from; });
        if (it == s.patient.end()) throw ConfigError("vertex generator references unknown capsule '" + from + "'");
        s.patient_vertices = anterior_surface_vertices(it->shape, g.at("spacing").get<double>());
      } else {
        throw ConfigError("patient_vertices must be an array, {file}, or {generate}");
      }
    }
    for (const auto& c : s.patient) {
      if (s.bore) {
        auto depth = bore_penetration(c.shape, *s.bore);
        if (depth && *depth > 0.0) throw ConfigError("patient capsule '" + c.name + "' does not fit inside the bore");
      }
    }
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  }
}

json scene_to_json(const Scene& scene, const RobotBody& body) {
  json j{{"schema", kSchema}};
  if (scene.bore) {
    j["bore"] = {{"origin", vec3_json(scene.bore->frame.position)},
                 {"axis", vec3_json(scene.bore->frame.rotation.col(2))},
                 {"inner_radius", scene.bore->inner_radius},
                 {"length", scene.bore->length}};
  } else {
    j["bore"] = nullptr;
  }
  if (scene.table) {
    j["table"] = {{"center", vec3_json(scene.table->frame.position)},
                  {"half_extents", vec3_json(scene.table->half_extents)}};
  } else {
    j["table"] = nullptr;
  }
  j["patient"] = json::array();
  for (const auto& c : scene.patient) j["patient"].push_back(capsule_json(c.name, c.shape));
  j["mounting"] = pose_to_json(scene.mounting);
  if (scene.lung_region) {
    j["lung_region"] = {{"min", vec3_json(scene.lung_region->min)}, {"max", vec3_json(scene.lung_region->max)}};
  }
  if (!scene.patient_vertices.empty()) {
    j["patient_vertices"] = json::array();
    for (const auto& v : scene.patient_vertices) j["patient_vertices"].push_back(vec3_json(v));
  }
  j["robot_body"] = json::array();
  for (const auto& l : body.links) {
    auto lj = capsule_json(l.name, l.shape);
    lj["frame"] = l.frame;
    lj["in_bore"] = l.in_bore;
    j["robot_body"].push_back(lj);
  }
  return j;
}

std::pair<Scene, RobotBody> load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scene file " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError("scene " + path.string() + ": " + e.what());
  }
  Scene scene = scene_from_json(j, path.parent_path());
  RobotBody body = j.contains("robot_body") ? robot_body_from_json(j.at("robot_body")) : default_robot_body();
  return {std::move(scene), std::move(body)};
}

std::vector<Eigen::Vector3d> load_vertex_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open vertex list " + path.string());
  std::vector<Eigen::Vector3d> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x)) continue;
    std::string rest;
    if (!(ls >> y >> z) || (ls >> rest)) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected three numbers");
    }
    out.emplace_back(x, y, z);
  }
  return out;
}

}  // namespace ctbot
