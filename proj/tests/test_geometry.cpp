#include <gtest/gtest.h>

#include <random>

#include "ctbot/geometry.hpp"
#include "oracles/oracles.hpp"

using namespace ctbot;
using Eigen::Vector3d;

TEST(SegmentDistance, IdenticalSegments) {
  const Vector3d a(0.1, 0.2, 0.3), b(1, -1, 2);
  EXPECT_EQ(segment_segment_distance(a, b, a, b), 0.0);
}

TEST(SegmentDistance, ParallelOffset) {
  EXPECT_NEAR(segment_segment_distance({0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}), 1.0, 1e-15);
}

TEST(SegmentDistance, DegenerateSegments) {
  EXPECT_NEAR(segment_segment_distance({0, 0, 0}, {0, 0, 0}, {3, 4, 0}, {3, 4, 0}), 5.0, 1e-15);
  EXPECT_NEAR(segment_segment_distance({0, 0, 0}, {0, 0, 0}, {-1, 1, 0}, {1, 1, 0}), 1.0, 1e-15);
}

TEST(SegmentDistance, CrossingSkewLines) {
  EXPECT_NEAR(segment_segment_distance({-1, 0, 0}, {1, 0, 0}, {0, -1, 0.5}, {0, 1, 0.5}), 0.5, 1e-15);
}

TEST(SegmentDistance, MatchesSamplingOracle) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  auto rv = [&] { return Vector3d(d(rng), d(rng), d(rng)); };
  for (int trial = 0; trial < 1000; ++trial) {
    const Vector3d p1 = rv(), p2 = rv(), p3 = rv(), p4 = rv();
    const double exact = segment_segment_distance(p1, p2, p3, p4);
    const double sampled = oracle::sampled_segment_distance(p1, p2, p3, p4);
    ASSERT_LE(exact, sampled + 1e-12);
    ASSERT_NEAR(exact, sampled, 1e-3);
  }
}

TEST(PointSegment, EndpointsAndInterior) {
  EXPECT_NEAR(point_segment_distance({0, 1, 0}, {-1, 0, 0}, {1, 0, 0}), 1.0, 1e-15);
  EXPECT_NEAR(point_segment_distance({3, 0, 0}, {-1, 0, 0}, {1, 0, 0}), 2.0, 1e-15);
}

TEST(BoxDistance, InsideAndOutside) {
  const Vector3d h(1, 2, 3);
  EXPECT_EQ(point_box_distance({0.5, -1, 2}, h), 0.0);
  EXPECT_NEAR(point_box_distance({2, 0, 0}, h), 1.0, 1e-15);
  EXPECT_NEAR(point_box_distance({2, 3, 0}, h), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(segment_box_distance({2, -5, 0}, {2, 5, 0}, h), 1.0, 1e-12);
  EXPECT_EQ(segment_box_distance({-5, 0, 0}, {5, 0, 0}, h), 0.0);
}

TEST(CapsulePenetration, Sign) {
  const Capsule a{{0, 0, 0}, {1, 0, 0}, 0.1};
  const Capsule b{{0, 0.15, 0}, {1, 0.15, 0}, 0.1};
  const Capsule c{{0, 0.5, 0}, {1, 0.5, 0}, 0.1};
  EXPECT_NEAR(capsule_penetration(a, b), 0.05, 1e-15);
  EXPECT_NEAR(capsule_penetration(a, c), -0.3, 1e-15);
}
