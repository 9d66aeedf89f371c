#include "untangle/risk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace untangle {

void RiskCoeffs::validate() const {
  if (!(alpha1 >= 0.0 && alpha2 >= 0.0 && alpha3 >= 0.0)) {
    throw std::invalid_argument("risk weights must be non-negative");
  }
  if (!(c1 > 0.0)) throw std::invalid_argument("c1 must be positive");
  if (!(theta_safe < theta_high)) throw std::invalid_argument("theta_safe must be < theta_high");
  if (!(tau_low < tau_high)) throw std::invalid_argument("tau_low must be < tau_high");
}

double topo_risk_score(double max_abs_linking, int braid_length, bool entangled,
                       const RiskCoeffs& c) {
  return c.alpha1 * max_abs_linking +
         c.alpha2 * std::tanh(static_cast<double>(braid_length) / c.c1) +
         (entangled ? c.alpha3 : 0.0);
}

int concurrency_budget(int braid_length, int n_min, int n_max, double alpha) {
  const double raw = static_cast<double>(n_max) / (1.0 + alpha * braid_length);
  return std::max(n_min, static_cast<int>(std::floor(raw)));
}

double adaptive_discount(double risk) { return 0.99 - 0.1 * std::tanh(risk / 0.5); }

ArmAction ArmAction::scaled(double factor) const {
  ArmAction a = *this;
  for (auto& v : a.node_velocities) v *= factor;
  return a;
}

std::string_view to_string(ScreeningDecision d) {
  switch (d) {
    case ScreeningDecision::pass: return "pass";
    case ScreeningDecision::scaled: return "scaled";
    case ScreeningDecision::conservative: return "conservative";
  }
  return "unknown";
}

double velocity_scale_factor(double risk, const RiskCoeffs& c) {
  const double f = (c.theta_high - risk) / (c.theta_high - c.theta_safe);
  return std::clamp(f, 0.1, 1.0);
}

ScreeningOutcome screen_action(const ArmAction& candidate, const LookaheadRisk& lookahead,
                               const ArmAction& conservative, const RiskCoeffs& c) {
  ScreeningOutcome out;
  const double r = lookahead(candidate);
  out.risk = r;

  auto go_conservative = [&] {
    out.action = conservative;
    out.decision = ScreeningDecision::conservative;
    out.scale = 0.0;
    out.replan_requested = true;
    const double rc = lookahead(conservative);
    out.executed_risk = std::isfinite(rc) ? rc : std::numeric_limits<double>::infinity();
    return out;
  };

  if (!std::isfinite(r)) {
    out.non_finite_risk = true;
    return go_conservative();
  }
  if (r < c.theta_safe) {
    out.action = candidate;
    out.executed_risk = r;
    return out;
  }
  if (r < c.theta_high) {
    out.scale = velocity_scale_factor(r, c);
    out.action = candidate.scaled(out.scale);
    out.decision = ScreeningDecision::scaled;
    const double rs = lookahead(out.action);
    if (std::isfinite(rs) && rs < c.theta_high) {
      out.executed_risk = rs;
      return out;
    }
  }
  return go_conservative();
}

}  // namespace untangle
