#include "untangle/kinematics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace untangle {
namespace {

ScenarioConfig small_scenario() { return make_scenario(Density::low, 3); }

TEST(ForwardKinematics, SegmentLengthsExactForAnyJoints) {
  const ScenarioConfig c = small_scenario();
  const ArmChain chain = arm_chain(c, 0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 0.3);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd q = Eigen::VectorXd::NullaryExpr(chain.dof(), [&] { return g(rng); });
    std::vector<Mat3> frames;
    const auto pts = forward_kinematics(chain, q, &frames);
    ASSERT_EQ(pts.size(), chain.joint_count() + 1);
    ASSERT_EQ(frames.size(), pts.size());
    EXPECT_EQ(pts[0], chain.base);
    for (std::size_t i = 0; i < chain.joint_count(); ++i) {
      EXPECT_NEAR((pts[i + 1] - pts[i]).norm(), chain.segment_lengths[i], 1e-12);
      EXPECT_NEAR((frames[i].transpose() * frames[i] - Mat3::Identity()).norm(), 0.0, 1e-12);
      EXPECT_NEAR(frames[i].determinant(), 1.0, 1e-12);
    }
  }
}

TEST(ForwardKinematics, RestPoseIsArcOfRestRadius) {
  const ScenarioConfig c = small_scenario();
  const ArmChain chain = arm_chain(c, 1);
  const Eigen::VectorXd q = rest_joints(c);
  const auto pts = forward_kinematics(chain, q);
  EXPECT_NEAR(chain.length(), c.arm_length, 1e-12);
  const MaterialCurvature m = material_curvature(chain, q);
  EXPECT_LE(m.twist, 1e-12);
  // Chords of length h inscribed in radius R turn by 2 asin(h / 2R) per joint.
  const double h = c.arm_length / (c.nodes_per_arm - 1);
  EXPECT_NEAR(m.bending, 2.0 * std::asin(h / (2.0 * c.rest_bend_radius)) / h, 1e-12);
  const Polyline rest = rest_centerline(c, 1);
  ASSERT_EQ(rest.size(), pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_NEAR((rest[i] - pts[i]).norm(), 0.0, 1e-12);
  // Planar: every node lies in the plane of reach and sag through the base.
  const Vec3 normal = c.reach_direction.cross(c.sag_direction).normalized();
  for (const auto& p : pts) EXPECT_NEAR((p - chain.base).dot(normal), 0.0, 1e-12);
}

TEST(NodeJacobian, MatchesFiniteDifferences) {
  const ScenarioConfig c = small_scenario();
  const ArmChain chain = arm_chain(c, 2);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 0.2);
  const Eigen::VectorXd q =
      rest_joints(c) + Eigen::VectorXd::NullaryExpr(chain.dof(), [&] { return g(rng); });
  const Eigen::MatrixXd jac = node_jacobian(chain, q);
  const auto stack = [&](const Eigen::VectorXd& x) {
    const auto p = forward_kinematics(chain, x);
    Eigen::VectorXd out(3 * static_cast<Eigen::Index>(p.size() - 1));
    for (std::size_t i = 1; i < p.size(); ++i) out.segment<3>(3 * static_cast<Eigen::Index>(i - 1)) = p[i];
    return out;
  };
  const double h = 1e-6;
  for (Eigen::Index k = 0; k < chain.dof(); ++k) {
    Eigen::VectorXd up = q, down = q;
    up(k) += h;
    down(k) -= h;
    const Eigen::VectorXd fd = (stack(up) - stack(down)) / (2 * h);
    EXPECT_LE((jac.col(k) - fd).norm(), 1e-7 * std::max(1.0, fd.norm())) << "column " << k;
  }
}

TEST(AdvanceArm, ZeroVelocityHoldsExactly) {
  const ScenarioConfig c = small_scenario();
  const ArmChain chain = arm_chain(c, 0);
  const Eigen::VectorXd rest = rest_joints(c);
  const Eigen::VectorXd q = rest + Eigen::VectorXd::Constant(chain.dof(), 0.01);
  const AdvanceResult r =
      advance_arm(chain, q, std::vector<Vec3>(chain.joint_count() + 1, Vec3::Zero()), rest, c.limits);
  EXPECT_EQ(r.joints, q);
  EXPECT_FALSE(r.rejected);
  EXPECT_FALSE(r.speed_clamped);
}

TEST(AdvanceArm, RandomCommandsStayWithinLimits) {
  const ScenarioConfig c = small_scenario();
  const ArmChain chain = arm_chain(c, 0);
  const Eigen::VectorXd rest = rest_joints(c);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 0.5);
  Eigen::VectorXd q = rest;
  for (int step = 0; step < 300; ++step) {
    std::vector<Vec3> v(chain.joint_count() + 1);
    for (auto& x : v) x = Vec3(g(rng), g(rng), g(rng));
    const Polyline before(forward_kinematics(chain, q));
    const AdvanceResult r = advance_arm(chain, q, v, rest, c.limits);
    const Polyline after(r.points);
    const ShapeCheck s = measure_shape(chain, r.joints, before, after, c.limits);
    EXPECT_TRUE(within_limits(s, c.limits)) << "step " << step;
    EXPECT_LE(s.max_speed, c.limits.v_max * (1 + 1e-9));
    EXPECT_NEAR(s.arc_length, c.arm_length, 1e-9);
    EXPECT_TRUE(r.speed_clamped || s.max_speed <= c.limits.v_max);
    q = r.joints;
  }
}

TEST(AdvanceArm, TipFollowsSmallCommand) {
  const ScenarioConfig c = small_scenario();
  const ArmChain chain = arm_chain(c, 0);
  const Eigen::VectorXd rest = rest_joints(c);
  std::vector<Vec3> v(chain.joint_count() + 1, Vec3::Zero());
  const Vec3 dir = Vec3(0.3, 0.5, 0.2).normalized();
  for (std::size_t i = 1; i < v.size(); ++i) {
    v[i] = 0.1 * std::pow(static_cast<double>(i) / (v.size() - 1), 3) * dir;
  }
  const auto before = forward_kinematics(chain, rest);
  const AdvanceResult r = advance_arm(chain, rest, v, rest, c.limits);
  const Vec3 moved = r.points.back() - before.back();
  EXPECT_GT(moved.dot(dir), 0.5 * c.limits.dt * 0.1);
}

TEST(AdvanceArm, NonFiniteCommandIsZeroedAndFlagged) {
  const ScenarioConfig c = small_scenario();
  const ArmChain chain = arm_chain(c, 0);
  const Eigen::VectorXd rest = rest_joints(c);
  std::vector<Vec3> v(chain.joint_count() + 1, Vec3::Zero());
  v.back() = Vec3(NAN, 0, 0);
  const AdvanceResult r = advance_arm(chain, rest, v, rest, c.limits);
  EXPECT_TRUE(r.speed_clamped);
  EXPECT_TRUE(r.joints.allFinite());
  EXPECT_EQ(r.joints, rest);
}

}  // namespace
}  // namespace untangle
