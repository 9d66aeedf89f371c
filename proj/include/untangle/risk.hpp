#pragma once

#include "untangle/geometry.hpp"

#include <functional>
#include <limits>
#include <string_view>
#include <vector>

namespace untangle {

/// Coefficients of the topological risk score and the thresholds that
/// consume it (screening, replay classification, effective-state test).
struct RiskCoeffs {
  double alpha1 = 1.0;  // max |Lk|
  double alpha2 = 1.0;  // saturated braid length
  double alpha3 = 5.0;  // entanglement indicator
  double c1 = 4.0;      // braid-length saturation scale
  double theta_safe = 0.3;
  double theta_high = 1.0;
  double tau_low = 0.2;
  double tau_high = 0.8;
  double tau_safe = 0.3;

  /// Throws std::invalid_argument on negative weights, c1 <= 0 or
  /// mis-ordered thresholds.
  void validate() const;
};

/// alpha1 * max|Lk| + alpha2 * tanh(|Br| / c1) + alpha3 * [entangled]
double topo_risk_score(double max_abs_linking, int braid_length, bool entangled,
                       const RiskCoeffs& c);

/// max(n_min, floor(n_max / (1 + alpha * |Br|)))
int concurrency_budget(int braid_length, int n_min, int n_max, double alpha);

/// 0.99 - 0.1 * tanh(risk / 0.5)
double adaptive_discount(double risk);

/// Command for one arm over one step.
struct ArmAction {
  std::vector<Vec3> node_velocities;
  Mat3 orientation_adjustment = Mat3::Identity();
  double curvature_target = 0.0;  // 0 disables the target
  double speed_limit = std::numeric_limits<double>::infinity();

  static ArmAction zero(std::size_t nodes) {
    ArmAction a;
    a.node_velocities.assign(nodes, Vec3::Zero());
    return a;
  }
  /// Same action with every velocity multiplied by `factor`.
  ArmAction scaled(double factor) const;
};

enum class ScreeningDecision { pass, scaled, conservative };

std::string_view to_string(ScreeningDecision d);

struct ScreeningOutcome {
  ArmAction action;
  ScreeningDecision decision = ScreeningDecision::pass;
  double risk = 0.0;           // lookahead risk of the candidate
  double executed_risk = 0.0;  // lookahead risk of the returned action
  double scale = 1.0;
  bool replan_requested = false;
  bool non_finite_risk = false;
};

/// Linear ramp (theta_high - r) / (theta_high - theta_safe) clamped to [0.1, 1].
double velocity_scale_factor(double risk, const RiskCoeffs& c);

using LookaheadRisk = std::function<double(const ArmAction&)>;

/// Staged screening of a candidate action against its one-step lookahead
/// risk: pass below theta_safe, scale velocities in [theta_safe, theta_high),
/// otherwise substitute `conservative` and request replanning. A scaled
/// action whose own lookahead reaches theta_high is escalated, so no action
/// with lookahead risk >= theta_high leaves without replan_requested.
ScreeningOutcome screen_action(const ArmAction& candidate, const LookaheadRisk& lookahead,
                               const ArmAction& conservative, const RiskCoeffs& c);

}  // namespace untangle
