#pragma once

#include "untangle/braid.hpp"
#include "untangle/geometry.hpp"
#include "untangle/kinematics.hpp"
#include "untangle/risk.hpp"
#include "untangle/scenario.hpp"
#include "untangle/schedule_fixtures.hpp"
#include "untangle/tasks.hpp"
#include "untangle/topology.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace untangle {

struct EnvSwitches {
  bool safety_layer = true;          // screen every arm action before execution
  bool hierarchical_control = true;  // topology-aware scheduler, budget, adaptive discount
};

/// Top-level decision for one step.
struct SchedulerAction {
  std::vector<int> releases;  // arms whose process goes back to the pool
  std::vector<std::pair<int, ProcessRef>> assignments;
  int concurrency_budget = 0;     // active-arm cap the scheduler applied
  bool adaptive_discount = true;  // discount from the risk formula, else gamma = 0.99
};

struct ArmStepRecord {
  std::optional<ProcessRef> assignment;
  bool commanded = false;  // some node velocity of the submitted action is non-zero
  ScreeningDecision decision = ScreeningDecision::pass;
  double lookahead_risk = 0.0;
  double executed_risk = 0.0;
  double scale = 1.0;
  bool replan_requested = false;
  bool non_finite_risk = false;
  bool speed_clamped = false;
  bool motion_rejected = false;
  double distance_before = 0.0;
  double distance_after = 0.0;
  bool on_target = false;
  bool progressing = false;
  int collab_events = 0;
  double local_risk = 0.0;
  double reward = 0.0;
};

struct StepInfo {
  int step = 0;  // 1-based macro-step just executed
  std::vector<ArmStepRecord> arms;
  std::vector<ProcessRef> started;
  std::vector<ProcessRef> completed;
  int rejected_assignments = 0;
  std::vector<ConstraintResult> constraints;  // C1 .. C8 after the step
  int obstacle_violations = 0;                // nodes inside an obstacle's clearance
  int workspace_violations = 0;               // nodes outside the workspace box
  TopoState topo;
  std::string braid_word;
  int concurrency_budget = 0;
  double discount = 0.99;
  double scheduler_reward = 0.0;
  bool entangled = false;
  bool all_tasks_complete = false;
  bool terminated = false;  // entanglement, completion or abort
  bool truncated = false;   // horizon reached
  bool aborted = false;
  std::string diagnostic;
};

/// Hierarchical multi-arm environment: wall-mounted discretized arms, a task
/// DAG with per-fixture waits, risk screening and topology tracking.
class Environment {
 public:
  static constexpr int kActionDim = 3;

  Environment(ScenarioConfig config, EnvSwitches switches);

  /// Starts an episode: rest poses, jittered targets, fresh task progress,
  /// empty braid. `fixture_index` selects v1..v4 (ignored unless the
  /// scenario rotates fixtures).
  void reset(std::uint64_t episode_seed, int fixture_index = 0);

  StepInfo step(const SchedulerAction& scheduler, const std::vector<ArmAction>& actions);

  /// Tip-velocity command (policy output) to per-node velocities: the tip
  /// speed is v_max * a / max(1, |a|) and node i moves with weight (i / (M-1))^3.
  ArmAction action_from_command(int arm, const Eigen::VectorXd& command) const;
  /// Retraction toward the rest pose at half speed.
  ArmAction conservative_action(int arm) const;

  /// Risk score of the state reached when `arm` executes `action` from the
  /// current state. Arms are screened and moved in index order, so during a
  /// step the current state already includes the earlier arms' motion.
  double lookahead_risk(int arm, const ArmAction& action) const;

  std::vector<Eigen::VectorXd> observations() const;
  std::vector<Eigen::VectorXd> critic_observations() const;
  int obs_dim() const;
  int critic_dim() const;

  std::vector<ConstraintResult> check_constraints() const;

  // State access for the scheduler, tests and the harness.
  const ScenarioConfig& config() const { return cfg_; }
  const EnvSwitches& switches() const { return switches_; }
  int arm_count() const { return cfg_.arms; }
  int current_step() const { return step_; }
  bool done() const { return done_; }
  const std::vector<ArmState>& arms() const { return arms_; }
  const std::vector<Vec3>& targets() const { return targets_; }
  Vec3 home_tip(int arm) const { return rest_[static_cast<std::size_t>(arm)].back(); }
  Vec3 target_of(int arm) const;
  Vec3 process_position(ProcessRef p) const;
  const TaskGraph& tasks() const { return graph_; }
  const Allocation& allocation() const { return alloc_; }
  const TopoState& topo() const { return topo_; }
  const BraidWord& braid() const { return braid_; }
  const ScheduleFixture& fixture() const { return *fixture_; }
  const std::vector<int>& strand_order() const { return strand_order_; }
  int strand_position(int arm) const { return strand_pos_[static_cast<std::size_t>(arm)]; }
  /// Unfinished, unheld process whose predecessors are complete.
  bool assignable(ProcessRef p) const;
  /// Step from which `p` may accrue progress (fixture wait after its
  /// predecessor); -1 while a predecessor is incomplete.
  int earliest_start(ProcessRef p) const;
  const std::vector<int>& replan_requests() const { return replan_requests_; }
  const std::vector<ProcessInterval>& process_intervals() const { return intervals_; }
  bool process_started(ProcessRef p) const { return start_step_[graph_.index(p)] > 0; }

  const Eigen::VectorXd& joints(int arm) const { return joints_[static_cast<std::size_t>(arm)]; }
  const ArmChain& chain(int arm) const { return chains_[static_cast<std::size_t>(arm)]; }

  /// Test hook: overwrite one arm's joint coordinates (velocities reset to zero).
  void set_joints(int arm, const Eigen::VectorXd& joints);
  /// Test hook: unchecked allocation write.
  void force_assignment(int arm, std::optional<ProcessRef> p) { alloc_.set(arm, p); }

 private:
  struct TopoCache {
    Eigen::MatrixXd linking;
    std::vector<std::array<int, 2>> counts;  // per adjacent strand pair: under, over
  };

  struct MoveTopology {
    Eigen::MatrixXd linking;
    std::vector<std::array<int, 2>> counts;
    std::vector<BraidLetter> letters;  // appended to the braid by the move
    double max_abs_linking = 0.0;
    std::size_t braid_length = 0;      // simplified, after the letters
  };

  /// Topology cache and braid letters after replacing one arm's centerline.
  MoveTopology topology_after_move(int arm, const Polyline& moved) const;
  std::vector<std::array<int, 2>> pair_counts(const std::vector<Polyline>& ordered,
                                              int first_pair, int last_pair) const;
  std::vector<BraidLetter> letters_from_counts(const std::vector<std::array<int, 2>>& before,
                                               const std::vector<std::array<int, 2>>& after) const;
  std::vector<Polyline> ordered_centerlines() const;
  void recompute_topology(bool update_monitor);
  double local_risk(int arm) const;
  double distance_to_target(int arm) const;
  void apply_scheduler(const SchedulerAction& a, StepInfo& info);

  ScenarioConfig cfg_;
  EnvSwitches switches_;
  std::vector<ArmChain> chains_;
  Eigen::VectorXd rest_joints_;
  std::vector<Polyline> rest_;
  std::vector<int> strand_order_;
  std::vector<int> strand_pos_;

  std::vector<ArmState> arms_;
  std::vector<Eigen::VectorXd> joints_;
  std::vector<Vec3> targets_;
  TaskGraph graph_;
  Allocation alloc_;
  const ScheduleFixture* fixture_ = nullptr;
  EntanglementMonitor monitor_;
  BraidWord braid_;
  TopoCache cache_;
  TopoState topo_;
  int step_ = 0;
  bool done_ = false;

  std::vector<int> start_step_;  // per process index, 0 = not started
  std::vector<int> end_step_;    // per process index, 0 = not complete
  std::vector<int> completer_;   // arm that completed each process, -1 if none
  std::vector<int> streak_;      // per arm consecutive on-target steps
  std::vector<ProcessInterval> intervals_;
  std::vector<int> replan_requests_;

  void place_arm(std::size_t arm, Eigen::VectorXd joints);
};

}  // namespace untangle
