#include "untangle/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace untangle {

namespace {

constexpr int kArmObsDim = 26;
constexpr int kCriticExtra = 3;

ArmAction limit_speed(const ArmAction& a) {
  if (!std::isfinite(a.speed_limit)) return a;
  ArmAction out = a;
  const double cap = std::max(0.0, a.speed_limit);
  for (auto& v : out.node_velocities) {
    const double n = v.norm();
    if (n > cap) v *= cap / n;
  }
  return out;
}

double box_slack(const Polyline& c, const Aabb& box) {
  double slack = kNoObstacleClearance;
  for (const auto& p : c.points()) {
    slack = std::min({slack, (p - box.lo).minCoeff(), (box.hi - p).minCoeff()});
  }
  return slack;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a * 0x9E3779B97F4A7C15ULL ^ (b + 0x632BE59BD9B4E019ULL + (a << 6) + (a >> 2));
  x ^= x >> 31;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 29;
  return x;
}

}  // namespace

Environment::Environment(ScenarioConfig config, EnvSwitches switches)
    : cfg_(std::move(config)), switches_(switches) {
  cfg_.validate();
  rest_joints_ = rest_joints(cfg_);
  for (int j = 0; j < cfg_.arms; ++j) {
    chains_.push_back(arm_chain(cfg_, j));
    rest_.emplace_back(forward_kinematics(chains_.back(), rest_joints_));
  }
  const ProjectionFrame frame = ProjectionFrame::from_direction(cfg_.projection_direction);
  strand_order_ = untangle::strand_order(cfg_.bases, frame);
  strand_pos_.assign(strand_order_.size(), 0);
  for (std::size_t k = 0; k < strand_order_.size(); ++k) {
    strand_pos_[static_cast<std::size_t>(strand_order_[k])] = static_cast<int>(k);
  }
  reset(0, 0);
}

void Environment::reset(std::uint64_t episode_seed, int fixture_index) {
  std::mt19937_64 rng(mix_seed(cfg_.seed, episode_seed));
  std::uniform_real_distribution<double> jitter(-cfg_.target_jitter, cfg_.target_jitter);
  targets_.clear();
  for (const auto& t : cfg_.workspace.targets) {
    targets_.push_back(t + Vec3(jitter(rng), jitter(rng), jitter(rng)));
  }
  arms_.assign(static_cast<std::size_t>(cfg_.arms), ArmState{});
  joints_.assign(static_cast<std::size_t>(cfg_.arms), rest_joints_);
  for (std::size_t j = 0; j < arms_.size(); ++j) place_arm(j, rest_joints_);
  graph_ = TaskGraph(cfg_.tasks);
  alloc_ = Allocation(cfg_.arms);
  if (cfg_.fixture == "rotate") {
    const auto& all = schedule_fixtures();
    fixture_ = &all[static_cast<std::size_t>(((fixture_index % 4) + 4) % 4)];
  } else {
    fixture_ = &schedule_fixture(cfg_.fixture);
  }
  monitor_ = EntanglementMonitor(cfg_.entanglement);
  braid_ = BraidWord(std::max(2, cfg_.arms));
  step_ = 0;
  done_ = false;
  const std::size_t np = graph_.process_count();
  start_step_.assign(np, 0);
  end_step_.assign(np, 0);
  completer_.assign(np, -1);
  streak_.assign(static_cast<std::size_t>(cfg_.arms), 0);
  intervals_.clear();
  replan_requests_.clear();
  cache_.counts.clear();
  recompute_topology(false);
}

void Environment::place_arm(std::size_t arm, Eigen::VectorXd joints) {
  ArmState& s = arms_[arm];
  s.centerline = Polyline(forward_kinematics(chains_[arm], joints, &s.orientations));
  s.velocities.assign(s.centerline.size(), Vec3::Zero());
  joints_[arm] = std::move(joints);
}

std::vector<Polyline> Environment::ordered_centerlines() const {
  std::vector<Polyline> out;
  out.reserve(arms_.size());
  for (int idx : strand_order_) out.push_back(arms_[static_cast<std::size_t>(idx)].centerline);
  return out;
}

std::vector<std::array<int, 2>> Environment::pair_counts(const std::vector<Polyline>& ordered,
                                                         int first_pair, int last_pair) const {
  std::vector<std::array<int, 2>> out;
  for (int p = first_pair; p <= last_pair; ++p) {
    std::array<int, 2> c{0, 0};
    const std::array<Polyline, 2> pair{ordered[static_cast<std::size_t>(p)],
                                       ordered[static_cast<std::size_t>(p) + 1]};
    const CrossingReport rep = detect_crossings(pair, cfg_.projection_direction);
    for (const auto& e : rep.events) ++c[e.sign == CrossingSign::under ? 0 : 1];
    out.push_back(c);
  }
  return out;
}

std::vector<BraidLetter> Environment::letters_from_counts(
    const std::vector<std::array<int, 2>>& before,
    const std::vector<std::array<int, 2>>& after) const {
  std::vector<BraidLetter> letters;
  for (std::size_t p = 0; p < after.size(); ++p) {
    for (int s = 0; s < 2; ++s) {
      const int exponent = s == 0 ? 1 : -1;
      const int diff = after[p][s] - (p < before.size() ? before[p][s] : 0);
      // A new crossing records its own letter; a crossing that disappears
      // records the inverse, undoing it.
      const int e = diff > 0 ? exponent : -exponent;
      for (int k = 0; k < std::abs(diff); ++k) letters.push_back({static_cast<int>(p) + 1, e});
    }
  }
  return letters;
}

void Environment::recompute_topology(bool update_monitor) {
  std::vector<Polyline> lines;
  lines.reserve(arms_.size());
  for (const auto& a : arms_) lines.push_back(a.centerline);
  cache_.linking = linking_matrix(lines);

  const std::vector<Polyline> ordered = ordered_centerlines();
  auto counts = pair_counts(ordered, 0, cfg_.arms - 2);
  if (update_monitor) {
    const auto letters = letters_from_counts(cache_.counts, counts);
    if (!letters.empty()) {
      std::vector<BraidLetter> all = braid_.letters();
      all.insert(all.end(), letters.begin(), letters.end());
      braid_ = simplify(BraidWord(braid_.strand_count(), std::move(all))).word;
    }
  }
  cache_.counts = std::move(counts);

  topo_.linking = cache_.linking;
  topo_.writhes.resize(cfg_.arms);
  for (int j = 0; j < cfg_.arms; ++j) topo_.writhes(j) = writhe(lines[static_cast<std::size_t>(j)]);
  topo_.braid_length = static_cast<int>(braid_.length());
  const double lk = topo_.max_abs_linking();
  if (update_monitor) monitor_.update(lk, topo_.braid_length);
  topo_.entangled = monitor_.entangled();
  topo_.risk = topo_risk_score(lk, topo_.braid_length, topo_.entangled, cfg_.risk);
}

Environment::MoveTopology Environment::topology_after_move(int arm, const Polyline& moved) const {
  const auto j = static_cast<std::size_t>(arm);
  MoveTopology m;
  m.linking = cache_.linking;
  for (int k = 0; k < cfg_.arms; ++k) {
    if (k == arm) continue;
    const double v = linking_number(moved, arms_[static_cast<std::size_t>(k)].centerline);
    m.linking(arm, k) = v;
    m.linking(k, arm) = v;
  }
  for (int r = 0; r < cfg_.arms; ++r) {
    for (int c = r + 1; c < cfg_.arms; ++c) m.max_abs_linking = std::max(m.max_abs_linking, std::abs(m.linking(r, c)));
  }

  std::vector<Polyline> ordered = ordered_centerlines();
  const int pos = strand_pos_[j];
  ordered[static_cast<std::size_t>(pos)] = moved;
  m.counts = cache_.counts;
  const int first = std::max(0, pos - 1);
  const int last = std::min(cfg_.arms - 2, pos);
  const auto local = pair_counts(ordered, first, last);
  for (int p = first; p <= last; ++p) {
    m.counts[static_cast<std::size_t>(p)] = local[static_cast<std::size_t>(p - first)];
  }
  m.letters = letters_from_counts(cache_.counts, m.counts);
  m.braid_length = braid_.length();
  if (!m.letters.empty()) {
    std::vector<BraidLetter> all = braid_.letters();
    all.insert(all.end(), m.letters.begin(), m.letters.end());
    m.braid_length = simplified_length(BraidWord(braid_.strand_count(), std::move(all)));
  }
  return m;
}

double Environment::lookahead_risk(int arm, const ArmAction& action) const {
  const auto j = static_cast<std::size_t>(arm);
  const ArmAction a = limit_speed(action);
  const AdvanceResult adv =
      advance_arm(chains_[j], joints_[j], a.node_velocities, rest_joints_, cfg_.limits);
  const MoveTopology m = topology_after_move(arm, Polyline(adv.points));
  const auto br = static_cast<int>(m.braid_length);
  const bool entangled = monitor_.peek(m.max_abs_linking, br);
  return topo_risk_score(m.max_abs_linking, br, entangled, cfg_.risk);
}

ArmAction Environment::action_from_command(int arm, const Eigen::VectorXd& command) const {
  const std::size_t m = arms_[static_cast<std::size_t>(arm)].centerline.size();
  Vec3 c = Vec3::Zero();
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(3, command.size()); ++i) c(i) = command(i);
  if (!c.allFinite()) c.setZero();
  const Vec3 tip = cfg_.limits.v_max * c / std::max(1.0, c.norm());
  ArmAction a = ArmAction::zero(m);
  for (std::size_t i = 1; i < m; ++i) {
    const double w = static_cast<double>(i) / static_cast<double>(m - 1);
    a.node_velocities[i] = w * w * w * tip;
  }
  return a;
}

ArmAction Environment::conservative_action(int arm) const {
  const auto j = static_cast<std::size_t>(arm);
  const Polyline& cur = arms_[j].centerline;
  ArmAction a = ArmAction::zero(cur.size());
  double vmax = 0.0;
  for (std::size_t i = 1; i < cur.size(); ++i) {
    a.node_velocities[i] = (rest_[j][i] - cur[i]) / cfg_.limits.dt;
    vmax = std::max(vmax, a.node_velocities[i].norm());
  }
  const double cap = 0.5 * cfg_.limits.v_max;
  if (vmax > cap) {
    for (auto& v : a.node_velocities) v *= cap / vmax;
  }
  return a;
}

Vec3 Environment::process_position(ProcessRef p) const {
  return targets_[static_cast<std::size_t>(process_target(cfg_, p))];
}

Vec3 Environment::target_of(int arm) const {
  const auto& p = alloc_.of(arm);
  return p ? process_position(*p) : home_tip(arm);
}

double Environment::distance_to_target(int arm) const {
  return (arms_[static_cast<std::size_t>(arm)].centerline.back() - target_of(arm)).norm();
}

bool Environment::assignable(ProcessRef p) const {
  return !graph_.complete(p) && !alloc_.holder(p) && graph_.predecessors_complete(p);
}

int Environment::earliest_start(ProcessRef p) const {
  int earliest = 1;
  for (const auto& q : graph_.predecessors(p)) {
    const int end = end_step_[graph_.index(q)];
    if (end == 0) return -1;
    int gap = 0;
    if (q.task == p.task && q.process + 1 == p.process) {
      gap = fixture_->required_gap(p.task + 1, p.process + 1);
    }
    earliest = std::max(earliest, end + 1 + gap);
  }
  return earliest;
}

void Environment::apply_scheduler(const SchedulerAction& a, StepInfo& info) {
  for (int arm : a.releases) {
    if (arm < 0 || arm >= cfg_.arms) {
      ++info.rejected_assignments;
      continue;
    }
    alloc_.release(arm);
    streak_[static_cast<std::size_t>(arm)] = 0;
  }
  for (const auto& [arm, p] : a.assignments) {
    bool ok = arm >= 0 && arm < cfg_.arms && !alloc_.of(arm);
    try {
      ok = ok && assignable(p);
    } catch (const std::out_of_range&) {
      ok = false;
    }
    if (!ok) {
      ++info.rejected_assignments;
      continue;
    }
    alloc_.assign(arm, p);
    streak_[static_cast<std::size_t>(arm)] = 0;
  }
  info.concurrency_budget = a.concurrency_budget;
  info.discount = a.adaptive_discount ? adaptive_discount(topo_.risk) : 0.99;
}

double Environment::local_risk(int arm) const {
  const double lk = topo_.row_max_abs_linking(arm);
  const auto n = letters_touching_strand(braid_, strand_pos_[static_cast<std::size_t>(arm)]);
  return cfg_.risk.alpha1 * lk +
         cfg_.risk.alpha2 * std::tanh(static_cast<double>(n) / cfg_.risk.c1);
}

StepInfo Environment::step(const SchedulerAction& scheduler, const std::vector<ArmAction>& actions) {
  if (done_) throw std::logic_error("step called on a finished episode; call reset first");
  if (static_cast<int>(actions.size()) != cfg_.arms) {
    throw std::invalid_argument("one action per arm is required");
  }
  const auto n = static_cast<std::size_t>(cfg_.arms);
  for (std::size_t j = 0; j < n; ++j) {
    if (actions[j].node_velocities.size() != arms_[j].centerline.size()) {
      throw std::invalid_argument("action must carry one velocity per node");
    }
  }
  StepInfo info;
  ++step_;
  info.step = step_;
  replan_requests_.clear();
  apply_scheduler(scheduler, info);

  info.arms.resize(n);
  for (std::size_t j = 0; j < n && !info.aborted; ++j) {
    ArmStepRecord& rec = info.arms[j];
    const int arm = static_cast<int>(j);
    rec.assignment = alloc_.of(arm);
    rec.distance_before = distance_to_target(arm);
    const ArmAction candidate = limit_speed(actions[j]);
    rec.commanded = std::any_of(candidate.node_velocities.begin(), candidate.node_velocities.end(),
                                [](const Vec3& v) { return !v.isZero(0.0); });
    ArmAction executed = candidate;
    if (switches_.safety_layer) {
      const ScreeningOutcome o = screen_action(
          candidate, [&](const ArmAction& x) { return lookahead_risk(arm, x); },
          conservative_action(arm), cfg_.risk);
      executed = o.action;
      rec.decision = o.decision;
      rec.lookahead_risk = o.risk;
      rec.executed_risk = o.executed_risk;
      rec.scale = o.scale;
      rec.replan_requested = o.replan_requested;
      rec.non_finite_risk = o.non_finite_risk;
      if (o.replan_requested) replan_requests_.push_back(arm);
    }

    const AdvanceResult adv =
        advance_arm(chains_[j], joints_[j], executed.node_velocities, rest_joints_, cfg_.limits);
    rec.speed_clamped = adv.speed_clamped;
    rec.motion_rejected = adv.rejected;
    bool finite = true;
    for (const auto& p : adv.points) finite = finite && p.allFinite();
    if (!finite) {
      info.aborted = true;
      info.diagnostic = "non-finite centerline for arm " + std::to_string(j);
      break;
    }
    const Polyline moved(adv.points);
    MoveTopology m = topology_after_move(arm, moved);
    cache_.linking = std::move(m.linking);
    cache_.counts = std::move(m.counts);
    if (!m.letters.empty()) {
      std::vector<BraidLetter> all = braid_.letters();
      all.insert(all.end(), m.letters.begin(), m.letters.end());
      braid_ = simplify(BraidWord(braid_.strand_count(), std::move(all))).word;
    }
    ArmState& st = arms_[j];
    std::vector<Vec3> vel(adv.points.size());
    for (std::size_t i = 0; i < vel.size(); ++i) vel[i] = (adv.points[i] - st.centerline[i]) / cfg_.limits.dt;
    st.centerline = moved;
    st.velocities = std::move(vel);
    st.orientations = adv.frames;
    joints_[j] = adv.joints;
  }

  if (!info.aborted) recompute_topology(true);

  int progressing = 0;
  for (std::size_t j = 0; j < n && !info.aborted; ++j) {
    ArmStepRecord& rec = info.arms[j];
    rec.distance_after = distance_to_target(static_cast<int>(j));
    const auto& held = alloc_.of(static_cast<int>(j));
    if (!held) {
      streak_[j] = 0;
      continue;
    }
    const ProcessRef p = *held;
    rec.on_target = rec.distance_after <= cfg_.reach_radius;
    const int earliest = earliest_start(p);
    if (!rec.on_target || earliest < 0 || step_ < earliest) {
      streak_[j] = 0;
      continue;
    }
    ++streak_[j];
    const std::size_t idx = graph_.index(p);
    if (start_step_[idx] == 0) {
      start_step_[idx] = step_;
      info.started.push_back(p);
      if (p.process > 0) {
        const int prev = completer_[graph_.index({p.task, p.process - 1})];
        if (prev >= 0 && prev != static_cast<int>(j)) ++info.arms[static_cast<std::size_t>(prev)].collab_events;
      }
    }
    const double before = graph_.progress(p);
    const double value = std::max(before, static_cast<double>(streak_[j]) / graph_.duration(p));
    graph_.set_progress(p, value);
    rec.progressing = graph_.progress(p) > before;
    if (rec.progressing) ++progressing;
    if (graph_.complete(p)) {
      end_step_[idx] = step_;
      completer_[idx] = static_cast<int>(j);
      intervals_.push_back({p.task + 1, p.process + 1, start_step_[idx], step_});
      info.completed.push_back(p);
      alloc_.release(static_cast<int>(j));
      streak_[j] = 0;
    }
  }

  const RewardCoeffs& rw = cfg_.rewards;
  const double unit = cfg_.limits.v_max * cfg_.limits.dt;
  for (std::size_t j = 0; j < n; ++j) {
    ArmStepRecord& rec = info.arms[j];
    rec.local_risk = local_risk(static_cast<int>(j));
    const double r_local = -(rec.distance_after - rec.distance_before) / unit;
    const bool clean_pass = switches_.safety_layer && rec.commanded &&
                            rec.decision == ScreeningDecision::pass;
    const double r_safety = clean_pass ? rw.safety_bonus : 0.0;
    const double r_collab = rw.collab_bonus * rec.collab_events;
    rec.reward = r_local + rw.eta * r_safety + rw.xi * r_collab - rw.kappa * rec.local_risk -
                 rw.step_penalty;
  }
  info.scheduler_reward = rw.process_reward * static_cast<double>(info.completed.size()) +
                          rw.alpha * progressing / static_cast<double>(cfg_.arms) -
                          rw.beta * topo_.risk;

  info.constraints = check_constraints();
  for (const auto& a : arms_) {
    for (const auto& p : a.centerline.points()) {
      if (!cfg_.workspace.bounds.contains(p)) ++info.workspace_violations;
      for (const auto& o : cfg_.workspace.obstacles) {
        if ((p - o.center).norm() < o.radius + cfg_.arm_radius) ++info.obstacle_violations;
      }
    }
  }
  info.topo = topo_;
  info.braid_word = braid_.to_string();
  info.entangled = topo_.entangled;
  info.all_tasks_complete = graph_.all_complete();
  info.terminated = info.entangled || info.all_tasks_complete || info.aborted;
  info.truncated = !info.terminated && step_ >= cfg_.horizon;
  done_ = info.terminated || info.truncated;
  return info;
}

std::vector<ConstraintResult> Environment::check_constraints() const {
  std::vector<ConstraintResult> out;
  const KinematicLimits& lim = cfg_.limits;

  double clearance = kNoObstacleClearance;
  double inside = kNoObstacleClearance;
  double speed = 0.0, curvature = 0.0, torsion = 0.0, length_slack = kNoObstacleClearance;
  for (std::size_t j = 0; j < arms_.size(); ++j) {
    const Polyline& c = arms_[j].centerline;
    clearance = std::min(clearance, min_obstacle_clearance(c, cfg_.workspace.obstacles, cfg_.arm_radius));
    inside = std::min(inside, box_slack(c, cfg_.workspace.bounds));
    for (const auto& v : arms_[j].velocities) speed = std::max(speed, v.norm());
    const MaterialCurvature m = material_curvature(chains_[j], joints_[j]);
    curvature = std::max(curvature, m.bending);
    torsion = std::max(torsion, m.twist);
    length_slack = std::min(length_slack,
                            chains_[j].length() * (1.0 + lim.length_tolerance) - arc_length(c));
  }
  const double c1 = std::min(clearance, inside);
  out.push_back({"C1", c1 >= 0.0, c1, {}});
  const double rel = 1.0 + 1e-9;
  out.push_back({"C2", speed <= lim.v_max * rel, lim.v_max - speed, {}});
  out.push_back({"C3", curvature <= lim.kappa_max * rel, lim.kappa_max - curvature, {}});
  out.push_back({"C4", torsion <= lim.torsion_max * rel, lim.torsion_max - torsion, {}});
  out.push_back({"C5", length_slack >= 0.0, length_slack, {}});

  ConstraintResult c6{"C6", true, 1.0, {}};
  for (std::size_t i = 0; i < start_step_.size() && c6.satisfied; ++i) {
    if (start_step_[i] == 0) continue;
    const ProcessRef p = graph_.ref(i);
    for (const auto& q : graph_.predecessors(p)) {
      const int end = end_step_[graph_.index(q)];
      if (end == 0 || start_step_[i] <= end) {
        c6.satisfied = false;
        c6.margin = -1.0;
        c6.detail = to_string(q) + " -> " + to_string(p);
        break;
      }
    }
  }
  out.push_back(c6);
  out.push_back(check_exclusive_process(alloc_));
  out.push_back(check_single_assignment(alloc_, graph_));
  return out;
}

void Environment::set_joints(int arm, const Eigen::VectorXd& joints) {
  const auto j = static_cast<std::size_t>(arm);
  if (joints.size() != chains_.at(j).dof()) throw std::invalid_argument("joint vector has the wrong size");
  place_arm(j, joints);
  recompute_topology(false);
}

int Environment::obs_dim() const { return kArmObsDim; }

int Environment::critic_dim() const { return kArmObsDim + kCriticExtra + 3 * (cfg_.arms - 1); }

std::vector<Eigen::VectorXd> Environment::observations() const {
  std::vector<Eigen::VectorXd> out;
  const double lk = topo_.max_abs_linking();
  const double br = std::tanh(topo_.braid_length / cfg_.risk.c1);
  for (int j = 0; j < cfg_.arms; ++j) {
    const ArmState& s = arms_[static_cast<std::size_t>(j)];
    const Polyline& c = s.centerline;
    const Vec3 base = c.front();
    const Vec3 tip = c.back();
    const Vec3 target = target_of(j);
    const auto& held = alloc_.of(j);
    Eigen::VectorXd o(kArmObsDim);
    o.segment<3>(0) = tip - base;
    o.segment<3>(3) = s.velocities.back() / cfg_.limits.v_max;
    o.segment<3>(6) = target - tip;
    o(9) = held ? 1.0 : 0.0;
    const int earliest = held ? earliest_start(*held) : -1;
    o(10) = held && earliest >= 0 && step_ + 1 >= earliest ? 1.0 : 0.0;
    o(11) = (target - tip).norm();
    o.segment<3>(12) = c[c.size() / 2] - base;
    o(15) = topo_.writhes(j);
    o(16) = topo_.row_max_abs_linking(j);
    o(17) = std::tanh(static_cast<double>(letters_touching_strand(braid_, strand_pos_[static_cast<std::size_t>(j)])) /
                      cfg_.risk.c1);
    Vec3 nearest = Vec3::Zero();
    double best = kNoObstacleClearance;
    for (const auto& ob : cfg_.workspace.obstacles) {
      const double d = (ob.center - tip).norm() - ob.radius;
      if (d < best) {
        best = d;
        nearest = ob.center - tip;
      }
    }
    o.segment<3>(18) = nearest;
    const double clr = min_obstacle_clearance(c, cfg_.workspace.obstacles, cfg_.arm_radius);
    o(21) = std::clamp(std::isfinite(clr) ? clr : 0.5, -0.1, 0.5);
    o(22) = lk;
    o(23) = br;
    o(24) = topo_.risk;
    o(25) = static_cast<double>(monitor_.streak()) / monitor_.thresholds().persistence;
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<Eigen::VectorXd> Environment::critic_observations() const {
  const auto local = observations();
  std::vector<Eigen::VectorXd> out;
  int completed = 0;
  for (std::size_t i = 0; i < graph_.process_count(); ++i) completed += graph_.complete(graph_.ref(i)) ? 1 : 0;
  for (int j = 0; j < cfg_.arms; ++j) {
    Eigen::VectorXd o(critic_dim());
    o.head(kArmObsDim) = local[static_cast<std::size_t>(j)];
    o(kArmObsDim) = static_cast<double>(step_) / cfg_.horizon;
    o(kArmObsDim + 1) = static_cast<double>(completed) / static_cast<double>(graph_.process_count());
    o(kArmObsDim + 2) = static_cast<double>(alloc_.active_count()) / cfg_.arms;
    Eigen::Index k = kArmObsDim + kCriticExtra;
    const Vec3 tip = arms_[static_cast<std::size_t>(j)].centerline.back();
    for (int m = 0; m < cfg_.arms; ++m) {
      if (m == j) continue;
      o.segment<3>(k) = arms_[static_cast<std::size_t>(m)].centerline.back() - tip;
      k += 3;
    }
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace untangle
