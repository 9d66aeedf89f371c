#include "untangle/risk.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace untangle {
namespace {

ArmAction velocity_action(std::vector<Vec3> v) {
  ArmAction a;
  a.node_velocities = std::move(v);
  return a;
}

TEST(ConcurrencyBudget, Examples) {
  EXPECT_EQ(concurrency_budget(0, 2, 10, 1.0), 10);
  EXPECT_EQ(concurrency_budget(4, 2, 10, 1.0), 2);
  EXPECT_EQ(concurrency_budget(4, 2, 10, 0.25), 5);
  EXPECT_EQ(concurrency_budget(100, 3, 10, 0.25), 3);
}

TEST(ConcurrencyBudget, MonotoneAndBounded) {
  for (double alpha : {0.0, 0.1, 0.25, 1.0, 3.0}) {
    int prev = 1 << 30;
    for (int br = 0; br < 60; ++br) {
      const int n = concurrency_budget(br, 2, 10, alpha);
      EXPECT_GE(n, 2);
      EXPECT_LE(n, 10);
      EXPECT_LE(n, prev);
      EXPECT_LE(concurrency_budget(br, 2, 10, alpha + 0.5), n);
      prev = n;
    }
  }
}

TEST(AdaptiveDiscount, Examples) {
  EXPECT_EQ(adaptive_discount(0.0), 0.99);
  EXPECT_NEAR(adaptive_discount(1e6), 0.89, 1e-12);
  EXPECT_NEAR(adaptive_discount(0.5), 0.99 - 0.1 * std::tanh(1.0), 1e-12);
  EXPECT_NEAR(adaptive_discount(0.5), 0.913841, 1e-6);
}

TEST(AdaptiveDiscount, DecreasingAndLipschitz) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng);
    const double b = u(rng);
    EXPECT_LE(std::abs(adaptive_discount(a) - adaptive_discount(b)), 0.2 * std::abs(a - b) + 1e-15);
    if (a < b) EXPECT_GT(adaptive_discount(a), adaptive_discount(b));
    EXPECT_GT(adaptive_discount(a), 0.89);
    EXPECT_LE(adaptive_discount(a), 0.99);
  }
}

TEST(RiskCoeffs, Validation) {
  EXPECT_NO_THROW(RiskCoeffs{}.validate());
  RiskCoeffs c;
  c.theta_safe = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.c1 = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.alpha3 = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(VelocityScale, RampWithFloor) {
  const RiskCoeffs c;
  EXPECT_EQ(velocity_scale_factor(0.3, c), 1.0);
  EXPECT_NEAR(velocity_scale_factor(0.65, c), 0.5, 1e-12);
  EXPECT_EQ(velocity_scale_factor(0.99, c), 0.1);
}

TEST(Screening, Stages) {
  const RiskCoeffs c;
  const ArmAction cand = velocity_action({Vec3(0.1, 0, 0), Vec3(0, 0.2, -0.1)});
  const ArmAction cons = ArmAction::zero(2);

  auto constant = [](double r) { return [r](const ArmAction&) { return r; }; };

  ScreeningOutcome o = screen_action(cand, constant(0.0), cons, c);
  EXPECT_EQ(o.decision, ScreeningDecision::pass);
  EXPECT_EQ(o.action.node_velocities, cand.node_velocities);
  EXPECT_FALSE(o.replan_requested);

  o = screen_action(cand, constant(0.3), cons, c);
  EXPECT_EQ(o.decision, ScreeningDecision::scaled);
  EXPECT_EQ(o.scale, 1.0);

  // Risk proportional to speed: the scaled action falls below theta_high.
  auto by_speed = [](const ArmAction& a) { return 4.0 * a.node_velocities[1].norm(); };
  o = screen_action(cand, by_speed, cons, c);
  EXPECT_EQ(o.decision, ScreeningDecision::scaled);
  const double f = (1.0 - o.risk) / 0.7;
  EXPECT_NEAR(o.scale, f, 1e-12);
  for (std::size_t i = 0; i < cand.node_velocities.size(); ++i) {
    EXPECT_NEAR((o.action.node_velocities[i] - f * cand.node_velocities[i]).norm(), 0.0, 1e-15);
  }
  EXPECT_LT(o.executed_risk, c.theta_high);

  o = screen_action(cand, constant(1.0), cons, c);
  EXPECT_EQ(o.decision, ScreeningDecision::conservative);
  EXPECT_TRUE(o.replan_requested);
  EXPECT_EQ(o.action.node_velocities, cons.node_velocities);

  o = screen_action(cand, constant(NAN), cons, c);
  EXPECT_EQ(o.decision, ScreeningDecision::conservative);
  EXPECT_TRUE(o.non_finite_risk);
  EXPECT_TRUE(o.replan_requested);
}

TEST(Screening, ScaledActionThatStaysRiskyEscalates) {
  const RiskCoeffs c;
  const ArmAction cand = velocity_action({Vec3(0.1, 0, 0)});
  int calls = 0;
  // Candidate in the scaling band; scaled version jumps above theta_high.
  auto lookahead = [&calls](const ArmAction& a) {
    ++calls;
    if (a.node_velocities[0].norm() == 0.0) return 0.0;
    return a.node_velocities[0].x() >= 0.1 ? 0.5 : 1.2;
  };
  const ScreeningOutcome o = screen_action(cand, lookahead, ArmAction::zero(1), c);
  EXPECT_EQ(o.decision, ScreeningDecision::conservative);
  EXPECT_TRUE(o.replan_requested);
  EXPECT_EQ(calls, 3);
}

TEST(Screening, NeverLeavesHighRiskWithoutReplan) {
  const RiskCoeffs c;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> gain(0.0, 8.0);
  for (int i = 0; i < 5000; ++i) {
    const ArmAction cand = velocity_action({Vec3(u(rng), u(rng), u(rng))});
    const double g = gain(rng);
    const double offset = 0.5 * (u(rng) + 1.0);
    auto look = [g, offset](const ArmAction& a) {
      return a.node_velocities[0].norm() == 0.0 ? offset : g * a.node_velocities[0].squaredNorm();
    };
    const ScreeningOutcome o = screen_action(cand, look, ArmAction::zero(1), c);
    if (look(o.action) >= c.theta_high) EXPECT_TRUE(o.replan_requested);
    if (o.decision == ScreeningDecision::scaled) {
      EXPECT_GT(o.scale, 0.0);
      EXPECT_NEAR(o.action.node_velocities[0].normalized().dot(cand.node_velocities[0].normalized()),
                  1.0, 1e-12);
    }
  }
}

}  // namespace
}  // namespace untangle
