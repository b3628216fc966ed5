#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "curiosity/orbit_space.hpp"

using namespace curiosity;

TEST(GeometryTest, DefaultDiskMatchesHandComputation) {
  const auto g = derive_geometry({});
  // d cos 30 = 60 * sqrt(3) / 2
  EXPECT_NEAR(g.r_max, 30.0 * std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(g.r_max, 51.9615, 5e-5);
  EXPECT_NEAR(g.delta_r, 8.66, 0.005);
  EXPECT_NEAR(g.height, 30.0, 1e-12);
  EXPECT_EQ(g.n_angles, 30);
  EXPECT_EQ(g.n_orbits, 6);
  EXPECT_EQ(g.n_views(), 180);
  EXPECT_NEAR(g.radius(6), g.r_max, 1e-12);
}

TEST(GeometryTest, RejectsBadConfigs) {
  OrbitSpaceConfig c;
  c.delta_alpha = 7.0;
  EXPECT_THROW(derive_geometry(c), ConfigError);
  c = {};
  c.theta = 90.0;
  EXPECT_THROW(derive_geometry(c), ConfigError);
  c = {};
  c.d = 0.0;
  EXPECT_THROW(derive_geometry(c), ConfigError);
  c = {};
  c.n_orbits = 0;
  EXPECT_THROW(derive_geometry(c), ConfigError);
}

TEST(MoveTest, LeftRightWrap) {
  const auto g = derive_geometry({});
  EXPECT_EQ(apply_move({3, 29}, Move::left, g), (GridPosition{3, 0}));
  EXPECT_EQ(apply_move({3, 0}, Move::right, g), (GridPosition{3, 29}));
  EXPECT_EQ(apply_move({3, 4}, Move::left, g), (GridPosition{3, 5}));
}

TEST(MoveTest, ForwardBackwardClamp) {
  const auto g = derive_geometry({});
  EXPECT_EQ(apply_move({1, 7}, Move::forward, g), (GridPosition{1, 7}));
  EXPECT_EQ(apply_move({6, 7}, Move::backward, g), (GridPosition{6, 7}));
  EXPECT_EQ(apply_move({4, 7}, Move::forward, g), (GridPosition{3, 7}));
  EXPECT_EQ(apply_move({4, 7}, Move::backward, g), (GridPosition{5, 7}));
}

TEST(MoveTest, EveryMoveStaysValidAndLeftRightInvert) {
  const auto g = derive_geometry({});
  for (int k = 1; k <= g.n_orbits; ++k)
    for (int j = 0; j < g.n_angles; ++j) {
      const GridPosition p{k, j};
      for (Move m : {Move::left, Move::right, Move::forward, Move::backward})
        EXPECT_TRUE(is_valid(apply_move(p, m, g), g));
      EXPECT_EQ(apply_move(apply_move(p, Move::left, g), Move::right, g), p);
    }
}

TEST(MoveTest, FullLapReturnsHome) {
  const auto g = derive_geometry({});
  GridPosition p{2, 11};
  for (int i = 0; i < g.n_angles; ++i) p = apply_move(p, Move::left, g);
  EXPECT_EQ(p, (GridPosition{2, 11}));
}

TEST(PoseTest, CameraSitsOnDiskAndAimsAtPoint) {
  const auto g = derive_geometry({});
  const Vec3 aim{1.0, -2.0, 0.5};
  const auto pose = camera_pose({6, 0}, g, aim);
  EXPECT_NEAR(pose.position.x, g.r_max, 1e-12);
  EXPECT_NEAR(pose.position.y, 0.0, 1e-12);
  EXPECT_NEAR(pose.position.z, 30.0, 1e-12);
  EXPECT_EQ(pose.look_at, aim);

  const auto q = camera_pose({2, 15}, g, aim);
  EXPECT_NEAR(q.position.x, -2 * g.delta_r, 1e-9);
  EXPECT_NEAR(q.position.y, 0.0, 1e-9);
}

TEST(PoseTest, OuterOrbitLineOfSightIsD) {
  const auto g = derive_geometry({});
  for (int j = 0; j < g.n_angles; ++j) {
    const auto pose = camera_pose({6, j}, g, {0, 0, 0});
    EXPECT_NEAR(pose.position.norm(), 60.0, 1e-9);
  }
}

TEST(PositionTest, NormalizedCoordinates) {
  const auto g = derive_geometry({});
  const auto [p0, p1] = normalized_position({3, 15}, g);
  EXPECT_DOUBLE_EQ(p0, 0.5);
  EXPECT_DOUBLE_EQ(p1, 0.5);
  const auto [q0, q1] = normalized_position({6, 0}, g);
  EXPECT_DOUBLE_EQ(q0, 0.0);
  EXPECT_DOUBLE_EQ(q1, 1.0);
}

TEST(PositionTest, ViewIndexIsBijective) {
  const auto g = derive_geometry({});
  std::set<int> seen;
  for (int k = 1; k <= g.n_orbits; ++k)
    for (int j = 0; j < g.n_angles; ++j) {
      const int idx = view_index({k, j}, g);
      EXPECT_EQ(position_of_view(idx, g), (GridPosition{k, j}));
      seen.insert(idx);
    }
  EXPECT_EQ(seen.size(), 180u);
  EXPECT_EQ(*seen.begin(), 0);
  EXPECT_EQ(*seen.rbegin(), 179);
}

TEST(PositionTest, ArcLengthOfOneAngularStep) {
  const auto g = derive_geometry({});
  // 2 pi r (12 / 360) on the outer orbit
  EXPECT_NEAR(arc_length(6, g), 2.0 * std::acos(-1.0) * g.r_max / 30.0, 1e-12);
  EXPECT_NEAR(arc_length(6, g), 10.8828, 5e-4);
}
