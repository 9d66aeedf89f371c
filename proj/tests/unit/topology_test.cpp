#include "untangle/braid.hpp"
#include "untangle/topology.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace untangle {
namespace {

constexpr double kPi = std::numbers::pi;

// Unit circle in the plane spanned by u, v around c.
Polyline ring(const Vec3& c, const Vec3& u, const Vec3& v, int segments) {
  std::vector<Vec3> pts;
  for (int i = 0; i < segments; ++i) {
    const double t = 2.0 * kPi * i / segments;
    pts.push_back(c + std::cos(t) * u + std::sin(t) * v);
  }
  pts.push_back(pts.front());
  return Polyline(pts);
}

std::pair<Polyline, Polyline> hopf(int segments) {
  return {ring(Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY(), segments),
          ring(Vec3::UnitX(), Vec3::UnitX(), Vec3::UnitZ(), segments)};
}

// One-turn helix closed by a radial excursion. The straight legs use the
// coil's segment length so the whole curve is uniformly sampled.
Polyline closed_helix(int segments) {
  const double pitch = 0.3;
  const double far = 3.0;
  std::vector<Vec3> pts;
  for (int i = 0; i <= segments; ++i) {
    const double t = 2.0 * kPi * i / segments;
    pts.emplace_back(std::cos(t), std::sin(t), pitch * t / (2.0 * kPi));
  }
  const double h = (pts[1] - pts[0]).norm();
  auto leg = [&](const Vec3& a, const Vec3& b) {
    const int n = std::max(1, static_cast<int>(std::lround((b - a).norm() / h)));
    for (int i = 1; i <= n; ++i) pts.push_back(a + (b - a) * (static_cast<double>(i) / n));
  };
  leg(Vec3(1, 0, pitch), Vec3(far, 0, pitch));
  leg(Vec3(far, 0, pitch), Vec3(far, 0, 0));
  leg(Vec3(far, 0, 0), Vec3(1, 0, 0));
  return Polyline(pts);
}

TEST(LinkingNumber, HopfLinkIsUnit) {
  const auto [a, b] = hopf(200);
  EXPECT_NEAR(std::abs(linking_number(a, b)), 1.0, 1e-2);
  const auto [a2, b2] = hopf(2000);
  EXPECT_NEAR(std::abs(linking_number(a2, b2)), 1.0, 1e-3);
  EXPECT_LT(std::abs(linking_number(a, b) - linking_number(a2, b2)), 1e-2);
}

TEST(LinkingNumber, FarSegmentsUnlinked) {
  const Polyline a({Vec3(0, 0, 0), Vec3(1, 0, 0)});
  const Polyline b({Vec3(0, 100, 0.1), Vec3(1, 100, 0.1)});
  EXPECT_LT(std::abs(linking_number(a, b)), 1e-6);
}

TEST(LinkingNumber, SymmetricAndReversalAntisymmetric) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec3> pa, pb;
    for (int i = 0; i < 15; ++i) {
      pa.emplace_back(n(rng), n(rng), n(rng));
      pb.emplace_back(n(rng), n(rng), n(rng));
    }
    const Polyline a(pa), b(pb);
    EXPECT_NEAR(linking_number(a, b), linking_number(b, a), 1e-12);
    EXPECT_NEAR(linking_number(a.reversed(), b), -linking_number(a, b), 1e-12);
  }
}

TEST(LinkingNumber, MatrixIsSymmetricWithZeroDiagonal) {
  const auto [a, b] = hopf(60);
  const Polyline c = ring(Vec3(10, 0, 0), Vec3::UnitX(), Vec3::UnitY(), 60);
  const std::vector<Polyline> curves{a, b, c};
  const Eigen::MatrixXd lk = linking_matrix(curves);
  EXPECT_EQ(lk.rows(), 3);
  EXPECT_EQ((lk - lk.transpose()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(lk.diagonal().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_DOUBLE_EQ(lk(0, 1), linking_number(a, b));
}

TEST(Writhe, PlanarCurveIsZero) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> pts;
  for (int i = 0; i < 40; ++i) pts.emplace_back(u(rng), u(rng), 0.0);
  EXPECT_LT(std::abs(writhe(Polyline(pts))), 1e-12);
  EXPECT_LT(std::abs(writhe(ring(Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY(), 200))), 1e-12);
}

TEST(Writhe, MirrorNegates) {
  const Polyline h = closed_helix(300);
  std::vector<Vec3> mirrored;
  for (const auto& p : h.points()) mirrored.emplace_back(p.x(), p.y(), -p.z());
  EXPECT_NEAR(writhe(Polyline(mirrored)), -writhe(h), 1e-12);
}

TEST(Writhe, HelixMatchesDenseOracle) {
  const double coarse = writhe(closed_helix(300));
  const double dense = writhe(closed_helix(3000));
  EXPECT_NEAR(coarse, dense, 1e-2);
  EXPECT_GT(std::abs(dense), 1e-3);
}

TEST(VirtualClosure, AppendsReturnPath) {
  const Polyline arm({Vec3(0, 0, 1), Vec3(0, 1, 1), Vec3(0, 2, 0.8)});
  const Polyline c = virtually_close(arm, -Vec3::UnitZ(), 5.0);
  EXPECT_TRUE(c.is_closed());
  ASSERT_EQ(c.size(), arm.size() + 3);
  EXPECT_EQ(c[3], Vec3(0, 2, -4.2));
  EXPECT_EQ(c[4], Vec3(0, 0, -4));
}

TEST(Crossings, DisjointProjectionsGiveNothing) {
  const std::vector<Polyline> arms{Polyline({Vec3(0, 0, 0), Vec3(0, 1, 0)}),
                                   Polyline({Vec3(1, 0, 0), Vec3(1, 1, 0)})};
  EXPECT_TRUE(detect_crossings(arms, Vec3::UnitZ()).events.empty());
}

TEST(Crossings, NearerArmIsOver) {
  const Polyline first({Vec3(0, 0, 0.5), Vec3(2, 2, 0.5)});
  const Polyline second({Vec3(1, 0, 0), Vec3(-1, 2, 0)});
  const std::vector<Polyline> arms{first, second};
  const CrossingReport r = detect_crossings(arms, Vec3::UnitZ(), 7);
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(r.events[0].strand_index, 1);
  EXPECT_EQ(r.events[0].sign, CrossingSign::over);
  EXPECT_EQ(r.events[0].time_step, 7);
  EXPECT_NEAR(r.events[0].braid_coordinate, 0.5, 1e-12);
  const BraidWord w = append_crossings(BraidWord(2), r.events);
  EXPECT_EQ(w.to_string(), "S1");

  const std::vector<Polyline> swapped{Polyline({Vec3(0, 0, 0), Vec3(2, 2, 0)}),
                                      Polyline({Vec3(1, 0, 0.5), Vec3(-1, 2, 0.5)})};
  ASSERT_EQ(detect_crossings(swapped, Vec3::UnitZ()).events.size(), 1u);
  EXPECT_EQ(detect_crossings(swapped, Vec3::UnitZ()).events[0].sign, CrossingSign::under);
}

TEST(Crossings, TraversalReversalKeepsEvents) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Polyline> arms;
    for (int a = 0; a < 3; ++a) {
      std::vector<Vec3> pts;
      for (int i = 0; i < 8; ++i) pts.emplace_back(a + u(rng), 0.4 * i + u(rng), u(rng));
      arms.emplace_back(pts);
    }
    std::vector<Polyline> rev;
    for (const auto& a : arms) rev.push_back(a.reversed());
    const auto e1 = detect_crossings(arms, Vec3::UnitZ()).events;
    const auto e2 = detect_crossings(rev, Vec3::UnitZ()).events;
    ASSERT_EQ(e1.size(), e2.size());
    for (std::size_t k = 0; k < e1.size(); ++k) {
      EXPECT_EQ(e1[k].strand_index, e2[k].strand_index);
      EXPECT_EQ(e1[k].sign, e2[k].sign);
      EXPECT_NEAR(e1[k].braid_coordinate, e2[k].braid_coordinate, 1e-12);
    }
  }
}

TEST(Crossings, StrandOrderFollowsOrderAxis) {
  const std::vector<Vec3> bases{Vec3(2, 0, 0), Vec3(-1, 5, 0), Vec3(0.5, -3, 2)};
  const auto order = strand_order(bases, ProjectionFrame::from_direction(Vec3::UnitZ()));
  EXPECT_EQ(order, (std::vector<int>{1, 2, 0}));
  EXPECT_THROW(ProjectionFrame::from_direction(Vec3(0, 0, 2)), std::invalid_argument);
}

TEST(TopoState, RiskExamples) {
  RiskCoeffs c;
  EXPECT_EQ(topo_risk_score(0.0, 0, false, c), 0.0);
  EXPECT_NEAR(topo_risk_score(1.0, 4, false, c), 1.0 + std::tanh(1.0), 1e-12);
  EXPECT_NEAR(topo_risk_score(1.0, 4, true, c) - topo_risk_score(1.0, 4, false, c), 5.0, 1e-12);

  const auto [a, b] = hopf(100);
  const std::vector<Polyline> curves{a, b};
  const TopoState s = topo_state(std::span<const Polyline>(curves), 4, false, c);
  EXPECT_NEAR(s.max_abs_linking(), std::abs(linking_number(a, b)), 1e-15);
  EXPECT_NEAR(s.risk, s.max_abs_linking() + std::tanh(1.0), 1e-12);
  EXPECT_EQ(s.writhes.size(), 2);
  EXPECT_NEAR(s.row_max_abs_linking(1), s.max_abs_linking(), 1e-15);
}

TEST(EntanglementMonitor, NeedsPersistence) {
  EntanglementMonitor m;
  EXPECT_FALSE(m.update(0.9, 4));
  EXPECT_FALSE(m.update(0.9, 5));
  EXPECT_TRUE(m.peek(0.8, 4));
  EXPECT_FALSE(m.peek(0.79, 4));
  EXPECT_TRUE(m.update(0.8, 4));
  EXPECT_FALSE(m.update(2.0, 3));
  EXPECT_EQ(m.streak(), 0);
}

}  // namespace
}  // namespace untangle
