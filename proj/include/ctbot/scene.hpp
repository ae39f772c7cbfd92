#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctbot/geometry.hpp"
#include "ctbot/kinematics.hpp"

namespace ctbot {

/// Hollow cylinder. Its axis is the z axis of `frame`, running from the frame
/// origin to `length` along +z.
struct Bore {
  Pose frame;
  double inner_radius = 0.325;
  double length = 1.0;
};

/// Oriented box: `frame` is the box center, `half_extents` along its axes.
struct Box {
  Pose frame;
  Eigen::Vector3d half_extents = Eigen::Vector3d::Zero();
};

struct NamedCapsule {
  std::string name;
  Capsule shape;
};

struct AxisAlignedRegion {
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Zero();

  bool contains(const Eigen::Vector3d& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
};

/// Collision world, expressed in the bore frame.
struct Scene {
  std::optional<Bore> bore;
  std::optional<Box> table;
  std::vector<NamedCapsule> patient;
  /// Pose of robot frame 0 in the bore frame.
  Pose mounting;
  /// Optional skin vertices used as reachability targets.
  std::vector<Eigen::Vector3d> patient_vertices;
  std::optional<AxisAlignedRegion> lung_region;

  /// No bore, table or patient; identity mounting.
  static Scene empty() { return {}; }
};

/// A capsule rigidly attached to DH frame `frame` (0..8), endpoints in that frame.
struct LinkCapsule {
  std::string name;
  int frame = 0;
  Capsule shape;
  /// Part of the arm that enters the bore (counted in the frontal cross-section).
  bool in_bore = true;
};

/// Robot links in chain order; consecutive entries share a joint.
struct RobotBody {
  std::vector<LinkCapsule> links;

  /// Pairs exempt from self-collision: exactly the consecutive (adjacent) links.
  std::vector<std::pair<std::size_t, std::size_t>> adjacent_pairs() const;
  RobotBody inflated(double delta) const;
};

struct CollisionPair {
  std::string body_a;
  std::string body_b;
  double depth = 0.0;
};

struct CollisionReport {
  bool in_collision = false;
  std::vector<CollisionPair> pairs;
};

Scene default_scene();
RobotBody default_robot_body();

/// Link capsules in the bore frame for configuration q.
std::vector<Capsule> posed_links(const Scene& scene, const RobotBody& body, const SerialChain& chain,
                                 const JointVector& q);

/// Depth by which the capsule leaves the inner cylinder (positive = collision).
/// Only the part of the capsule axis within the bore's axial extent counts.
std::optional<double> bore_penetration(const Capsule& capsule, const Bore& bore);

/// Radius + 0 minus distance to the box (positive = collision).
double box_penetration(const Capsule& capsule, const Box& box);

CollisionReport check_collision(const Scene& scene, const RobotBody& body, const SerialChain& chain,
                                const JointVector& q);

/// Early-exit form of check_collision for Monte Carlo use.
bool is_collision_free(const Scene& scene, const RobotBody& body, const SerialChain& chain, const JointVector& q);

struct CrossSection {
  double width = 0.0;
  double height = 0.0;
};

/// Bounding box of the in-bore links projected onto the plane normal to the
/// bore axis (bore x and y axes).
CrossSection frontal_cross_section(const Scene& scene, const RobotBody& body, const SerialChain& chain,
                                   const JointVector& q);

/// Vertices on the upper (anterior, +y) half of a capsule's cylindrical part,
/// spaced about `spacing` apart, for a capsule whose axis is parallel to bore z.
std::vector<Eigen::Vector3d> anterior_surface_vertices(const Capsule& capsule, double spacing);

Scene scene_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json scene_to_json(const Scene& scene, const RobotBody& body);
RobotBody robot_body_from_json(const nlohmann::json& j);

/// Loads both the scene and the robot body from a scene file. Throws ConfigError.
std::pair<Scene, RobotBody> load_scene(const std::filesystem::path& path);

/// One 3-vector per line, whitespace separated; '#' starts a comment.
std::vector<Eigen::Vector3d> load_vertex_list(const std::filesystem::path& path);

}  // namespace ctbot
