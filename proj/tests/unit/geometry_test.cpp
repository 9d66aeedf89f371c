#include "untangle/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace untangle {
namespace {

Polyline circle(double r, int segments) {
  std::vector<Vec3> pts;
  for (int i = 0; i < segments; ++i) {
    const double t = 2.0 * std::numbers::pi * i / segments;
    pts.emplace_back(r * std::cos(t), r * std::sin(t), 0.0);
  }
  pts.push_back(pts.front());
  return Polyline(pts);
}

TEST(Polyline, RejectsDegenerateInput) {
  EXPECT_THROW(Polyline({Vec3::Zero()}), std::invalid_argument);
  EXPECT_THROW(Polyline({Vec3::Zero(), Vec3::Zero()}), std::invalid_argument);
  EXPECT_THROW(Polyline({Vec3::Zero(), Vec3(NAN, 0, 0)}), std::invalid_argument);
}

TEST(ArcLength, Examples) {
  EXPECT_DOUBLE_EQ(arc_length(Polyline({Vec3::Zero(), Vec3::UnitX()})), 1.0);
  const Polyline square({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0), Vec3(0, 0, 0)});
  EXPECT_TRUE(square.is_closed());
  EXPECT_DOUBLE_EQ(arc_length(square), 4.0);
  EXPECT_NEAR(arc_length(circle(1.0, 200)), 2.0 * std::numbers::pi, 1e-3);
}

TEST(ArcLength, RigidMotionInvariant) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  std::vector<Vec3> pts;
  for (int i = 0; i < 30; ++i) pts.emplace_back(n(rng), n(rng), n(rng));
  const Polyline p(pts);
  const Mat3 rot = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
  const Vec3 shift(4, -2, 9);
  std::vector<Vec3> moved;
  for (const auto& x : pts) moved.push_back(rot * x + shift);
  EXPECT_NEAR(arc_length(Polyline(moved)), arc_length(p), 1e-12 * arc_length(p));
}

TEST(Curvature, Examples) {
  const Polyline line({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(3, 0, 0)});
  for (double k : curvature_profile(line)) EXPECT_EQ(k, 0.0);

  const Polyline corner({Vec3(1, 0, 0), Vec3(0, 0, 0), Vec3(0, 1, 0)});
  const auto k = curvature_profile(corner);
  ASSERT_EQ(k.size(), 1u);
  EXPECT_NEAR(k[0], std::sqrt(2.0), 1e-12);

  const double r = 0.7;
  for (double v : curvature_profile(circle(r, 100))) EXPECT_NEAR(v, 1.0 / r, 0.01 / r);
}

TEST(Curvature, RegularPolygonMatchesCircumscribedCircle) {
  for (int n : {6, 12, 24, 48, 96}) {
    for (double v : curvature_profile(circle(2.0, n))) EXPECT_NEAR(v, 0.5, 1e-12) << n;
  }
}

TEST(Torsion, PlanarIsZeroHelixMatches) {
  for (double t : torsion_profile(circle(1.0, 40))) EXPECT_NEAR(t, 0.0, 1e-12);

  // Helix r = 1, pitch 2*pi*c has torsion c / (1 + c^2).
  const double c = 0.3;
  std::vector<Vec3> pts;
  for (int i = 0; i <= 400; ++i) {
    const double t = 0.02 * i;
    pts.emplace_back(std::cos(t), std::sin(t), c * t);
  }
  const auto tau = torsion_profile(Polyline(pts));
  ASSERT_EQ(tau.size(), pts.size() - 3);
  for (double v : tau) EXPECT_NEAR(v, c / (1 + c * c), 2e-3);
}

TEST(Clearance, Examples) {
  ArmState arm = ArmState::at_rest(Polyline({Vec3(2, 0, 0), Vec3(3, 0, 0)}));
  Workspace w;
  w.obstacles.push_back({Vec3::Zero(), 0.5});
  EXPECT_NEAR(min_obstacle_clearance(arm, w, 0.1), 1.4, 1e-12);

  ArmState inside = ArmState::at_rest(Polyline({Vec3(0, 0, 0), Vec3(1, 0, 0)}));
  EXPECT_NEAR(min_obstacle_clearance(inside, w, 0.1), -0.6, 1e-12);

  EXPECT_EQ(min_obstacle_clearance(arm, Workspace{}, 0.1), kNoObstacleClearance);
}

TEST(Clearance, NonIncreasingInObstacleRadius) {
  const Polyline arm({Vec3(0, 0, 0), Vec3(1, 1, 0), Vec3(2, 0, 1)});
  double prev = INFINITY;
  for (double r = 0.1; r < 2.0; r += 0.1) {
    const double c = min_obstacle_clearance(arm, {{Vec3(1, 0, 0), r}}, 0.05);
    EXPECT_LE(c, prev);
    prev = c;
  }
}

TEST(ArmState, RestFramesAreRotations) {
  const ArmState a = ArmState::at_rest(circle(1.0, 12));
  EXPECT_NO_THROW(a.validate());
  ASSERT_EQ(a.orientations.size(), a.centerline.size());
  EXPECT_NEAR((a.orientations[0].col(0) - a.centerline.segment(0).normalized()).norm(), 0.0,
              1e-12);
  for (std::size_t i = 1; i + 1 < a.centerline.size(); ++i) {
    const Vec3 t = (a.centerline.segment(i - 1).normalized() + a.centerline.segment(i).normalized())
                       .normalized();
    EXPECT_NEAR((a.orientations[i].col(0) - t).norm(), 0.0, 1e-12);
  }
  ArmState bad = a;
  bad.orientations[0] *= -1.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = a;
  bad.velocities.pop_back();
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace untangle
