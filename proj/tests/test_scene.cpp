#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>

#include "ctbot/errors.hpp"
#include "ctbot/robot_model.hpp"
#include "ctbot/scene.hpp"
#include "support.hpp"

using namespace ctbot;
using nlohmann::json;

namespace {

const SerialChain& chain() {
  static const SerialChain c = default_robot_model().chain;
  return c;
}

bool has_pair(const CollisionReport& r, const std::string& a, const std::string& b) {
  return std::any_of(r.pairs.begin(), r.pairs.end(), [&](const CollisionPair& p) {
    return (p.body_a == a && p.body_b == b) || (p.body_a == b && p.body_b == a);
  });
}

RobotBody single_link(Capsule shape) {
  RobotBody body;
  body.links.push_back({"probe", 0, shape, true});
  return body;
}

}  // namespace

TEST(Collision, EmptySceneAtHomeIsFree) {
  const Scene s = Scene::empty();
  const auto report = check_collision(s, default_robot_body(), chain(), JointVector::Zero());
  EXPECT_FALSE(report.in_collision);
  EXPECT_TRUE(is_collision_free(s, default_robot_body(), chain(), JointVector::Zero()));
}

TEST(Collision, DefaultSceneAtHomeIsFree) {
  const auto report = check_collision(default_scene(), default_robot_body(), chain(), JointVector::Zero());
  for (const auto& p : report.pairs) ADD_FAILURE() << p.body_a << " / " << p.body_b << " " << p.depth;
}

TEST(Collision, PatientOnNeedleReported) {
  Scene s = Scene::empty();
  const Pose f7 = forward_kinematics(chain(), JointVector::Zero(), 7);
  const Eigen::Vector3d mid = f7.transform_point({0, 0, 0.0575});
  s.patient.push_back({"blob", {mid, mid, 0.005}});
  const auto report = check_collision(s, default_robot_body(), chain(), JointVector::Zero());
  EXPECT_TRUE(report.in_collision);
  EXPECT_TRUE(has_pair(report, "link:needle", "patient:blob"));
  for (const auto& p : report.pairs) {
    if (p.body_a == "link:needle") EXPECT_NEAR(p.depth, 0.005 + 6e-4, 1e-12);
  }
  EXPECT_FALSE(is_collision_free(s, default_robot_body(), chain(), JointVector::Zero()));
}

TEST(Collision, BoreWall) {
  Scene s = Scene::empty();
  s.bore = Bore{};
  const double r = 0.02;
  const double outside = s.bore->inner_radius + r + 1e-3;
  const auto hit = check_collision(s, single_link({{outside, 0, 0.2}, {outside, 0, 0.4}, r}), chain(),
                                   JointVector::Zero());
  EXPECT_TRUE(has_pair(hit, "link:probe", "bore"));
  for (const auto& p : hit.pairs) EXPECT_NEAR(p.depth, 2 * r + 1e-3, 1e-12);

  const double inside = s.bore->inner_radius - r - 1e-3;
  EXPECT_FALSE(check_collision(s, single_link({{0, inside, 0.2}, {0, inside, 0.4}, r}), chain(), JointVector::Zero())
                   .in_collision);
  // outside the axial extent the wall does not exist
  EXPECT_FALSE(check_collision(s, single_link({{outside, 0, -0.4}, {outside, 0, -0.2}, r}), chain(),
                               JointVector::Zero())
                   .in_collision);
}

TEST(Collision, Table) {
  Scene s = Scene::empty();
  s.table = Box{{Eigen::Vector3d(0, -1, 0), Eigen::Matrix3d::Identity()}, Eigen::Vector3d(1, 0.1, 1)};
  EXPECT_TRUE(has_pair(check_collision(s, single_link({{0, -0.95, 0}, {0, -0.5, 0}, 0.01}), chain(),
                                       JointVector::Zero()),
                       "link:probe", "table"));
  EXPECT_FALSE(
      check_collision(s, single_link({{0, -0.85, 0}, {0, -0.5, 0}, 0.01}), chain(), JointVector::Zero()).in_collision);
}

TEST(Collision, SelfCollisionSkipsAdjacentPairs) {
  RobotBody body;
  body.links = {{"a", 0, {{0, 0, 0}, {1, 0, 0}, 0.1}, true},
                {"b", 0, {{0, 0, 0}, {0, 1, 0}, 0.1}, true},
                {"c", 0, {{0.5, 0.05, 0}, {0.5, 0.05, 1}, 0.1}, true}};
  const auto report = check_collision(Scene::empty(), body, chain(), JointVector::Zero());
  EXPECT_FALSE(has_pair(report, "link:a", "link:b"));
  EXPECT_FALSE(has_pair(report, "link:b", "link:c"));
  EXPECT_TRUE(has_pair(report, "link:a", "link:c"));
  EXPECT_EQ(body.adjacent_pairs().size(), 2u);
}

TEST(Collision, Deterministic) {
  std::mt19937_64 rng(12);
  const Scene s = default_scene();
  const RobotBody b = default_robot_body();
  for (int i = 0; i < 200; ++i) {
    const JointVector q = testing_support::random_q(rng, chain().limits);
    const auto r1 = check_collision(s, b, chain(), q);
    const auto r2 = check_collision(s, b, chain(), q);
    ASSERT_EQ(r1.pairs.size(), r2.pairs.size());
    ASSERT_EQ(r1.in_collision, is_collision_free(s, b, chain(), q) == false);
  }
}

TEST(Collision, InflatedBodyIsMoreConservative) {
  std::mt19937_64 rng(13);
  const Scene s = default_scene();
  const RobotBody b = default_robot_body();
  const RobotBody fat = b.inflated(0.01);
  for (int i = 0; i < 300; ++i) {
    const JointVector q = testing_support::random_q(rng, chain().limits);
    if (is_collision_free(s, fat, chain(), q)) ASSERT_TRUE(is_collision_free(s, b, chain(), q));
  }
}

TEST(CrossSection, HomePoseFrontalProfile) {
  // The needle is mounted perpendicular to link 6 in the kinematic table, so
  // at home link 6 lies across the bore: the profile is a single link
  // diameter wide and link 6 plus the boom tall.
  const auto cs = frontal_cross_section(default_scene(), default_robot_body(), chain(), JointVector::Zero());
  EXPECT_NEAR(cs.width, 0.040, 1e-12);
  EXPECT_NEAR(cs.height, 0.0557 + 0.015 + 0.02, 1e-12);
  EXPECT_GT(cs.height, 0.050);
}

TEST(CrossSection, NoConfigurationFitsFiftyByFifty) {
  std::mt19937_64 rng(14);
  const Scene s = default_scene();
  const RobotBody b = default_robot_body();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 20000; ++i) {
    const JointVector q = testing_support::random_q(rng, chain().limits);
    const auto cs = frontal_cross_section(s, b, chain(), q);
    best = std::min(best, std::max(cs.width, cs.height));
  }
  EXPECT_GT(best, 0.050);
}

TEST(SceneFile, ShippedFileEqualsDefault) {
  const auto [s, b] = load_scene(std::string(CTBOT_CONFIG_DIR) + "/scene.json");
  const Scene d = default_scene();
  const RobotBody db = default_robot_body();
  ASSERT_TRUE(s.bore && s.table && s.lung_region);
  EXPECT_EQ(s.bore->inner_radius, d.bore->inner_radius);
  EXPECT_EQ(s.bore->length, d.bore->length);
  EXPECT_EQ(s.table->half_extents, d.table->half_extents);
  EXPECT_EQ(s.table->frame.position, d.table->frame.position);
  ASSERT_EQ(s.patient.size(), d.patient.size());
  for (std::size_t i = 0; i < s.patient.size(); ++i) {
    EXPECT_EQ(s.patient[i].name, d.patient[i].name);
    EXPECT_EQ(s.patient[i].shape.a, d.patient[i].shape.a);
    EXPECT_EQ(s.patient[i].shape.b, d.patient[i].shape.b);
    EXPECT_EQ(s.patient[i].shape.radius, d.patient[i].shape.radius);
  }
  EXPECT_EQ(s.mounting.position, d.mounting.position);
  EXPECT_EQ(s.mounting.rotation, d.mounting.rotation);
  EXPECT_EQ(s.patient_vertices, d.patient_vertices);
  EXPECT_EQ(s.lung_region->min, d.lung_region->min);
  EXPECT_EQ(s.lung_region->max, d.lung_region->max);
  ASSERT_EQ(b.links.size(), db.links.size());
  for (std::size_t i = 0; i < b.links.size(); ++i) {
    EXPECT_EQ(b.links[i].name, db.links[i].name);
    EXPECT_EQ(b.links[i].frame, db.links[i].frame);
    EXPECT_EQ(b.links[i].shape.a, db.links[i].shape.a);
    EXPECT_EQ(b.links[i].shape.b, db.links[i].shape.b);
    EXPECT_EQ(b.links[i].shape.radius, db.links[i].shape.radius);
  }
}

TEST(SceneFile, JsonRoundTripKeepsVertices) {
  const Scene d = default_scene();
  const json j = scene_to_json(d, default_robot_body());
  const Scene s = scene_from_json(j);
  EXPECT_EQ(s.patient_vertices, d.patient_vertices);
  EXPECT_EQ(robot_body_from_json(j.at("robot_body")).links.size(), default_robot_body().links.size());
}

TEST(SceneFile, VertexFileReference) {
  const auto verts = testing_support::temp_path("verts.txt");
  std::ofstream(verts) << "# x y z\n0 0 0.5\n0.01 0.02 0.6\n\n";
  EXPECT_EQ(load_vertex_list(verts).size(), 2u);
  json j = scene_to_json(default_scene(), default_robot_body());
  j["patient_vertices"] = {{"file", verts.filename().string()}};
  const Scene s = scene_from_json(j, verts.parent_path());
  ASSERT_EQ(s.patient_vertices.size(), 2u);
  EXPECT_EQ(s.patient_vertices[1], Eigen::Vector3d(0.01, 0.02, 0.6));
}

TEST(SceneFile, InvalidInputs) {
  json j = scene_to_json(default_scene(), default_robot_body());
  j["patient"][0]["radius"] = 0.5;  // does not fit inside the bore
  EXPECT_THROW(scene_from_json(j), ConfigError);
  j = scene_to_json(default_scene(), default_robot_body());
  j["patient_vertices"] = {{"generate", {{"capsule", "nobody"}, {"spacing", 0.01}}}};
  EXPECT_THROW(scene_from_json(j), ConfigError);
  EXPECT_THROW(load_scene("/nonexistent/scene.json"), ConfigError);
  const auto bad = testing_support::temp_path("bad_verts.txt");
  std::ofstream(bad) << "0 0\n";
  EXPECT_THROW(load_vertex_list(bad), ConfigError);
}

TEST(SurfaceVertices, OnAnteriorHalf) {
  const Capsule torso = default_scene().patient.front().shape;
  const auto v = anterior_surface_vertices(torso, 0.01);
  ASSERT_FALSE(v.empty());
  for (const auto& p : v) {
    EXPECT_NEAR(point_segment_distance(p, torso.a, torso.b), torso.radius, 1e-9);
    EXPECT_GE(p.y(), torso.a.y() - 1e-12);
  }
}
