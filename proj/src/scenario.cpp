#include "untangle/scenario.hpp"

#include "untangle/kinematics.hpp"

#include <json.hpp>

#include <cmath>
#include <random>
#include <stdexcept>

namespace untangle {

namespace {

using nlohmann::json;

json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string_view to_string(Density d) {
  switch (d) {
    case Density::low: return "low";
    case Density::medium: return "medium";
    case Density::high: return "high";
  }
  return "unknown";
}

Density parse_density(std::string_view s) {
  if (s == "low") return Density::low;
  if (s == "med" || s == "medium") return Density::medium;
  if (s == "high") return Density::high;
  throw std::invalid_argument("unknown scenario '" + std::string(s) +
                              "' (expected low, med or high)");
}

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("scenario: " + what); };
  if (arms < 2) fail("arms must be at least 2");
  if (nodes_per_arm < 4) fail("nodes_per_arm must be at least 4");
  if (!(arm_length > 0.0)) fail("arm_length must be positive");
  if (!(arm_radius >= 0.0)) fail("arm_radius must be non-negative");
  if (!(rest_bend_radius > 0.0)) fail("rest_bend_radius must be positive");
  if (static_cast<int>(bases.size()) != arms) fail("bases must list one point per arm");
  if (workspace.targets.empty()) fail("at least one target is required");
  if (tasks.empty()) fail("at least one task is required");
  if (!(limits.dt > 0.0) || !(limits.v_max > 0.0)) fail("dt and v_max must be positive");
  if (!(limits.kappa_max > 0.0) || !(limits.torsion_max > 0.0)) fail("curvature limits must be positive");
  if (limits.speed_halvings < 0 || !(limits.damping > 0.0) || !(limits.elastic_relaxation >= 0.0) ||
      limits.elastic_relaxation >= 1.0) {
    fail("bad solver settings");
  }
  const double h = arm_length / (nodes_per_arm - 1);
  if (h > 2.0 * rest_bend_radius) fail("rest_bend_radius too small for the segment length");
  if (2.0 * std::asin(h / (2.0 * rest_bend_radius)) / h > 0.999 * limits.kappa_max) {
    fail("rest pose exceeds kappa_max");
  }
  if (!(reach_radius > 0.0)) fail("reach_radius must be positive");
  if (horizon < 1) fail("horizon must be positive");
  if (budget_n_min < 1 || budget_n_min > arms) fail("budget_n_min must lie in [1, arms]");
  if (budget_alpha < 0.0) fail("budget_alpha must be non-negative");
  if (replan_cooldown < 0) fail("replan_cooldown must be non-negative");
  if (fixture != "rotate" && fixture != "v1" && fixture != "v2" && fixture != "v3" &&
      fixture != "v4") {
    fail("fixture must be v1, v2, v3, v4 or rotate");
  }
  if (std::abs(projection_direction.norm() - 1.0) > 1e-9) fail("projection_direction must be unit");
  if (entanglement.persistence < 1) fail("entanglement persistence must be positive");
  risk.validate();
  (void)TaskGraph(tasks);
}

std::string ScenarioConfig::to_json_text() const {
  json j;
  j["name"] = name;
  j["density"] = std::string(to_string(density));
  j["seed"] = seed;
  j["arms"] = arms;
  j["nodes_per_arm"] = nodes_per_arm;
  j["arm_length"] = arm_length;
  j["arm_radius"] = arm_radius;
  j["rest_bend_radius"] = rest_bend_radius;
  j["bases"] = json::array();
  for (const auto& b : bases) j["bases"].push_back(vec_to_json(b));
  j["reach_direction"] = vec_to_json(reach_direction);
  j["sag_direction"] = vec_to_json(sag_direction);
  j["workspace"]["lo"] = vec_to_json(workspace.bounds.lo);
  j["workspace"]["hi"] = vec_to_json(workspace.bounds.hi);
  j["targets"] = json::array();
  for (const auto& t : workspace.targets) j["targets"].push_back(vec_to_json(t));
  j["obstacles"] = json::array();
  for (const auto& o : workspace.obstacles) {
    j["obstacles"].push_back({{"center", vec_to_json(o.center)}, {"radius", o.radius}});
  }
  j["target_jitter"] = target_jitter;
  j["tasks"] = json::array();
  for (const auto& t : tasks) {
    j["tasks"].push_back({{"id", t.id}, {"durations", t.durations}, {"complexity", t.complexity}});
  }
  j["risk"] = {{"alpha1", risk.alpha1},       {"alpha2", risk.alpha2},
               {"alpha3", risk.alpha3},       {"c1", risk.c1},
               {"theta_safe", risk.theta_safe}, {"theta_high", risk.theta_high},
               {"tau_low", risk.tau_low},     {"tau_high", risk.tau_high},
               {"tau_safe", risk.tau_safe}};
  j["rewards"] = {{"alpha", rewards.alpha},
                  {"beta", rewards.beta},
                  {"eta", rewards.eta},
                  {"xi", rewards.xi},
                  {"kappa", rewards.kappa},
                  {"process_reward", rewards.process_reward},
                  {"safety_bonus", rewards.safety_bonus},
                  {"collab_bonus", rewards.collab_bonus},
                  {"step_penalty", rewards.step_penalty}};
  j["limits"] = {{"dt", limits.dt},
                 {"v_max", limits.v_max},
                 {"kappa_max", limits.kappa_max},
                 {"torsion_max", limits.torsion_max},
                 {"length_tolerance", limits.length_tolerance},
                 {"elastic_relaxation", limits.elastic_relaxation},
                 {"damping", limits.damping},
                 {"speed_halvings", limits.speed_halvings}};
  j["entanglement"] = {{"linking", entanglement.linking},
                       {"braid_length", entanglement.braid_length},
                       {"persistence", entanglement.persistence}};
  j["projection_direction"] = vec_to_json(projection_direction);
  j["reach_radius"] = reach_radius;
  j["horizon"] = horizon;
  j["budget_n_min"] = budget_n_min;
  j["budget_alpha"] = budget_alpha;
  j["replan_cooldown"] = replan_cooldown;
  j["fixture"] = fixture;
  return j.dump(2);
}

ScenarioConfig ScenarioConfig::from_json_text(std::string_view text) {
  ScenarioConfig c;
  try {
    const json j = json::parse(text);
    read_opt(j, "name", c.name);
    if (j.contains("density")) c.density = parse_density(j["density"].get<std::string>());
    read_opt(j, "seed", c.seed);
    read_opt(j, "arms", c.arms);
    read_opt(j, "nodes_per_arm", c.nodes_per_arm);
    read_opt(j, "arm_length", c.arm_length);
    read_opt(j, "arm_radius", c.arm_radius);
    read_opt(j, "rest_bend_radius", c.rest_bend_radius);
    if (j.contains("bases")) {
      c.bases.clear();
      for (const auto& b : j["bases"]) c.bases.push_back(vec_from_json(b));
    }
    if (j.contains("reach_direction")) c.reach_direction = vec_from_json(j["reach_direction"]);
    if (j.contains("sag_direction")) c.sag_direction = vec_from_json(j["sag_direction"]);
    if (j.contains("workspace")) {
      c.workspace.bounds.lo = vec_from_json(j["workspace"].at("lo"));
      c.workspace.bounds.hi = vec_from_json(j["workspace"].at("hi"));
    }
    if (j.contains("targets")) {
      c.workspace.targets.clear();
      for (const auto& t : j["targets"]) c.workspace.targets.push_back(vec_from_json(t));
    }
    if (j.contains("obstacles")) {
      c.workspace.obstacles.clear();
      for (const auto& o : j["obstacles"]) {
        c.workspace.obstacles.push_back({vec_from_json(o.at("center")), o.at("radius").get<double>()});
      }
    }
    read_opt(j, "target_jitter", c.target_jitter);
    if (j.contains("tasks")) {
      c.tasks.clear();
      for (const auto& t : j["tasks"]) {
        c.tasks.push_back({t.at("id").get<int>(), t.at("durations").get<std::vector<int>>(),
                           t.value("complexity", std::string{})});
      }
    }
    if (j.contains("risk")) {
      const auto& r = j["risk"];
      read_opt(r, "alpha1", c.risk.alpha1);
      read_opt(r, "alpha2", c.risk.alpha2);
      read_opt(r, "alpha3", c.risk.alpha3);
      read_opt(r, "c1", c.risk.c1);
      read_opt(r, "theta_safe", c.risk.theta_safe);
      read_opt(r, "theta_high", c.risk.theta_high);
      read_opt(r, "tau_low", c.risk.tau_low);
      read_opt(r, "tau_high", c.risk.tau_high);
      read_opt(r, "tau_safe", c.risk.tau_safe);
    }
    if (j.contains("rewards")) {
      const auto& r = j["rewards"];
      read_opt(r, "alpha", c.rewards.alpha);
      read_opt(r, "beta", c.rewards.beta);
      read_opt(r, "eta", c.rewards.eta);
      read_opt(r, "xi", c.rewards.xi);
      read_opt(r, "kappa", c.rewards.kappa);
      read_opt(r, "process_reward", c.rewards.process_reward);
      read_opt(r, "safety_bonus", c.rewards.safety_bonus);
      read_opt(r, "collab_bonus", c.rewards.collab_bonus);
      read_opt(r, "step_penalty", c.rewards.step_penalty);
    }
    if (j.contains("limits")) {
      const auto& l = j["limits"];
      read_opt(l, "dt", c.limits.dt);
      read_opt(l, "v_max", c.limits.v_max);
      read_opt(l, "kappa_max", c.limits.kappa_max);
      read_opt(l, "torsion_max", c.limits.torsion_max);
      read_opt(l, "length_tolerance", c.limits.length_tolerance);
      read_opt(l, "elastic_relaxation", c.limits.elastic_relaxation);
      read_opt(l, "damping", c.limits.damping);
      read_opt(l, "speed_halvings", c.limits.speed_halvings);
    }
    if (j.contains("entanglement")) {
      const auto& e = j["entanglement"];
      read_opt(e, "linking", c.entanglement.linking);
      read_opt(e, "braid_length", c.entanglement.braid_length);
      read_opt(e, "persistence", c.entanglement.persistence);
    }
    if (j.contains("projection_direction")) {
      c.projection_direction = vec_from_json(j["projection_direction"]);
    }
    read_opt(j, "reach_radius", c.reach_radius);
    read_opt(j, "horizon", c.horizon);
    read_opt(j, "budget_n_min", c.budget_n_min);
    read_opt(j, "budget_alpha", c.budget_alpha);
    read_opt(j, "replan_cooldown", c.replan_cooldown);
    read_opt(j, "fixture", c.fixture);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("scenario config: ") + e.what());
  }
  c.validate();
  return c;
}

Polyline rest_centerline(const ScenarioConfig& c, int arm) {
  return Polyline(forward_kinematics(arm_chain(c, arm), rest_joints(c)));
}

int process_target(const ScenarioConfig& c, ProcessRef p) {
  const auto k = static_cast<int>(c.workspace.targets.size());
  return (p.task + p.process) % k;
}

ScenarioConfig make_scenario(Density d, std::uint64_t seed) {
  ScenarioConfig c;
  c.density = d;
  c.name = std::string(to_string(d));
  c.seed = seed;
  int targets = 4;
  int obstacles = 6;
  switch (d) {
    case Density::low:
      c.arms = 4;
      targets = 4;
      obstacles = 6;
      c.horizon = 200;
      break;
    case Density::medium:
      c.arms = 6;
      targets = 6;
      obstacles = 12;
      c.horizon = 200;
      break;
    case Density::high:
      c.arms = 10;
      targets = 8;
      obstacles = 24;
      c.horizon = 200;
      break;
  }
  const double spacing = 0.2;
  const double z0 = 0.5;
  for (int j = 0; j < c.arms; ++j) c.bases.push_back({spacing * j, 0.0, z0});
  const double x_lo = 0.0;
  const double x_hi = spacing * (c.arms - 1);
  c.workspace.bounds = {{x_lo - 0.5, -0.05, -0.4}, {x_hi + 0.5, 1.3, 1.2}};
  c.tasks = standard_tasks();

  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(d) + 17);
  std::uniform_real_distribution<double> ux(x_lo - 0.3, x_hi + 0.3);
  std::uniform_real_distribution<double> uy(0.72, 0.9);
  std::uniform_real_distribution<double> uz(0.1, 0.7);
  while (static_cast<int>(c.workspace.targets.size()) < targets) {
    const Vec3 t{ux(rng), uy(rng), uz(rng)};
    bool ok = true;
    for (const auto& o : c.workspace.targets) ok = ok && (o - t).norm() >= 0.15;
    if (ok) c.workspace.targets.push_back(t);
  }

  std::vector<Polyline> rest;
  for (int j = 0; j < c.arms; ++j) rest.push_back(rest_centerline(c, j));
  std::uniform_real_distribution<double> ox(x_lo - 0.15, x_hi + 0.15);
  std::uniform_real_distribution<double> oy(0.15, 1.0);
  std::uniform_real_distribution<double> oz(-0.05, 0.8);
  std::uniform_real_distribution<double> orad(0.03, 0.06);
  int attempts = 0;
  while (static_cast<int>(c.workspace.obstacles.size()) < obstacles) {
    if (++attempts > 100000) throw std::runtime_error("obstacle placement did not converge");
    const Obstacle o{{ox(rng), oy(rng), oz(rng)}, orad(rng)};
    bool ok = true;
    for (const auto& p : rest) {
      ok = ok && min_obstacle_clearance(p, {o}, c.arm_radius) > 0.02;
    }
    for (const auto& t : c.workspace.targets) {
      ok = ok && (t - o.center).norm() - o.radius > 0.12;
    }
    for (const auto& q : c.workspace.obstacles) {
      ok = ok && (q.center - o.center).norm() > q.radius + o.radius + 0.02;
    }
    if (ok) c.workspace.obstacles.push_back(o);
  }
  c.validate();
  return c;
}

}  // namespace untangle
