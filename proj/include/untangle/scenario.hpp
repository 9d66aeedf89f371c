#pragma once

#include "untangle/geometry.hpp"
#include "untangle/risk.hpp"
#include "untangle/tasks.hpp"
#include "untangle/topology.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace untangle {

enum class Density { low, medium, high };

std::string_view to_string(Density d);
/// Accepts "low", "med", "medium" and "high"; throws std::invalid_argument.
Density parse_density(std::string_view s);

struct RewardCoeffs {
  double alpha = 1.0;  // scheduler throughput
  double beta = 1.0;   // scheduler topological penalty
  double eta = 1.0;    // arm safety bonus
  double xi = 1.0;     // arm collaboration bonus
  double kappa = 1.0;  // arm local topological penalty
  double process_reward = 10.0;
  double safety_bonus = 0.1;
  double collab_bonus = 1.0;
  double step_penalty = 0.01;
};

struct KinematicLimits {
  double dt = 0.1;                 // s
  double v_max = 0.2;              // m/s, per node
  double kappa_max = 10.0;         // 1/m, material bending curvature
  double torsion_max = 10.0;       // rad/m, material twist curvature
  double length_tolerance = 1e-9;  // relative slack on segment and arc lengths
  double elastic_relaxation = 0.05;  // per-step pull of the joints toward the rest pose
  double damping = 0.01;           // least-squares damping of the joint update
  int speed_halvings = 6;          // retries before a step is rejected
};

/// Everything needed to build an environment instance.
struct ScenarioConfig {
  std::string name = "low";
  Density density = Density::low;
  std::uint64_t seed = 1;

  int arms = 4;
  int nodes_per_arm = 11;
  double arm_length = 1.0;
  double arm_radius = 0.05;
  double rest_bend_radius = 1.2;  // rest pose: planar arc sagging below the base height
  std::vector<Vec3> bases;
  Vec3 reach_direction = Vec3::UnitY();
  Vec3 sag_direction = -Vec3::UnitZ();

  Workspace workspace;
  double target_jitter = 0.03;  // per-episode uniform jitter on every target
  std::vector<Task> tasks;

  RiskCoeffs risk;
  RewardCoeffs rewards;
  KinematicLimits limits;
  EntanglementMonitor::Thresholds entanglement;
  Vec3 projection_direction = Vec3::UnitZ();

  double reach_radius = 0.05;
  int horizon = 200;
  int budget_n_min = 1;
  double budget_alpha = 0.25;
  int replan_cooldown = 10;
  std::string fixture = "rotate";  // "v1".."v4", or "rotate" to cycle per episode

  /// Throws std::invalid_argument naming the first bad field.
  void validate() const;

  std::string to_json_text() const;
  /// Missing fields keep their defaults. Throws std::invalid_argument.
  static ScenarioConfig from_json_text(std::string_view text);
};

/// Seeded low / medium / high density layout: 4 / 6 / 10 wall-mounted arms,
/// 4 / 6 / 8 targets, 6 / 12 / 24 spherical obstacles placed so that no
/// rest-pose node violates the clearance constraint.
ScenarioConfig make_scenario(Density d, std::uint64_t seed);

/// Rest-pose centerline of one arm.
Polyline rest_centerline(const ScenarioConfig& c, int arm);

/// Target index of a process: (task + process) mod target count.
int process_target(const ScenarioConfig& c, ProcessRef p);

}  // namespace untangle
