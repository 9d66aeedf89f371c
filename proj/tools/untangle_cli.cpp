#include "untangle/braid.hpp"
#include "untangle/harness.hpp"
#include "untangle/schedule_fixtures.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace untangle;

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const unsigned long long v = std::stoull(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad seed '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("no seeds given");
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunArgs {
  std::string scenario = "low";
  std::string seeds = "1";
  std::vector<std::string> ablate;
  std::string out = "out";
  int episodes = -1;
  int eval_episodes = 100;
  int trace_episodes = 4;
  int checkpoint_every = 0;
  int jobs = 1;
  std::string config;
  bool quiet = false;
};

int do_run(const RunArgs& a) {
  RunConfig cfg;
  cfg.scenario = parse_density(a.scenario);
  cfg.seeds = parse_seeds(a.seeds);
  std::string ablations;
  for (const auto& s : a.ablate) ablations += (ablations.empty() ? "" : ",") + s;
  cfg.ablation = parse_ablation(ablations);
  cfg.episodes = a.episodes >= 0 ? a.episodes : RunConfig::default_episodes(cfg.scenario);
  cfg.eval_episodes = a.eval_episodes;
  cfg.trace_episodes = a.trace_episodes;
  cfg.checkpoint_every = a.checkpoint_every;
  cfg.jobs = a.jobs;
  if (!a.config.empty()) cfg.scenario_override = ScenarioConfig::from_json_text(read_file(a.config));
  cfg.validate();

  std::mutex io;
  ProgressCallback progress;
  if (!a.quiet) {
    progress = [&io](std::uint64_t seed, const EpisodeSummary& e) {
      if ((e.episode + 1) % 100 != 0) return;
      std::lock_guard lock(io);
      std::cerr << "seed " << seed << ' ' << e.phase << " episode " << e.episode + 1 << '\n';
    };
  }
  const std::filesystem::path out(a.out);
  const RunReport report = run(cfg, progress, out / "checkpoints");
  write_artifacts(report, out);

  const ReportMetrics m = report_metrics(report);
  std::cout << "scenario " << to_string(cfg.scenario) << ", ablation " << ablation_label(cfg.ablation)
            << ", " << cfg.seeds.size() << " seed(s), " << cfg.episodes << " training episodes\n"
            << "entanglement rate  " << m.entanglement_rate.mean << " +- " << m.entanglement_rate.std << " %\n"
            << "success rate       " << m.success_rate.mean << " +- " << m.success_rate.std << " %\n"
            << "intervention rate  " << m.intervention_rate.mean << " +- " << m.intervention_rate.std << " %\n"
            << "idle rate          " << m.idle_rate.mean << " +- " << m.idle_rate.std << " %\n"
            << "convergence        " << m.convergence_episodes.mean << " +- " << m.convergence_episodes.std << " episodes\n"
            << "mean reward        " << m.mean_reward.mean << " +- " << m.mean_reward.std << '\n'
            << "artifacts in " << out.string() << '\n';
  return 0;
}

int do_debug_braid(const std::string& word, int strands) {
  const BraidWord w = BraidWord::parse(word, strands);
  const SimplifyResult r = simplify(w);
  std::cout << "input       " << (w.empty() ? "e" : w.to_string()) << "  (length " << w.length()
            << ", inversions " << inversion_count(w) << ", strands " << w.strand_count() << ")\n";
  for (std::size_t i = 0; i < r.trace.steps.size(); ++i) {
    const RewriteStep& s = r.trace.steps[i];
    std::cout << "step " << i + 1 << "  " << to_string(s.rule) << " at " << s.position
              << "  -> length " << s.length_after << ", inversions " << s.inversions_after << '\n';
  }
  std::cout << "normal form " << (r.word.empty() ? "e" : r.word.to_string()) << "  (length "
            << r.word.length() << ")\n";
  if (w.length() <= 12) {
    const ConfluenceVerdict v = confluence_oracle(w);
    const char* kind = v.kind == ConfluenceVerdict::Kind::confluent    ? "confluent"
                       : v.kind == ConfluenceVerdict::Kind::divergent ? "divergent"
                                                                       : "inconclusive";
    std::cout << "confluence  " << kind << " (" << v.nodes_explored << " words explored)\n";
  }
  return 0;
}

int do_validate(const std::string& trace_path, const std::string& fixture_name) {
  const ScheduleFixture& fixture = schedule_fixture(fixture_name);
  std::ifstream in(trace_path);
  if (!in) throw std::runtime_error("cannot open " + trace_path);
  const std::vector<TracedSchedule> groups = read_traced_schedules(in);
  int checked = 0;
  int failed = 0;
  for (const auto& g : groups) {
    if (!g.fixture.empty() && g.fixture != fixture.name) continue;
    ++checked;
    const ScheduleVerdict v = validate_schedule_fixture(g.intervals, fixture);
    const std::string label = g.key.empty() ? "trace" : g.key;
    std::cout << label << ": " << (v.pass ? "pass" : "FAIL") << " (" << g.intervals.size()
              << " intervals)\n";
    for (const auto& x : v.violations) {
      std::cout << "  task " << x.task << " P" << x.from_process << " -> P" << x.to_process << ": "
                << x.reason << '\n';
    }
    if (!v.pass) ++failed;
  }
  if (checked == 0) {
    std::cerr << "no process records for fixture " << fixture.name << " in " << trace_path << '\n';
    return 2;
  }
  std::cout << checked - failed << "/" << checked << " schedules pass " << fixture.name << '\n';
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topology-aware multi-arm coordination: training runs, braid debugging and schedule validation"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Train and evaluate per seed, write metrics.json, curve.csv, trace.jsonl");
  run_cmd->add_option("--scenario", run_args.scenario, "low | med | high")->check(CLI::IsMember({"low", "med", "medium", "high"}));
  run_cmd->add_option("--seeds", run_args.seeds, "comma-separated seeds");
  run_cmd->add_option("--ablate", run_args.ablate, "dual_replay | safety_layer | hierarchical_control (repeatable or comma-separated)")->delimiter(',');
  run_cmd->add_option("--out", run_args.out, "output directory");
  run_cmd->add_option("--episodes", run_args.episodes, "training episodes per seed (default by scenario)");
  run_cmd->add_option("--eval-episodes", run_args.eval_episodes, "greedy evaluation episodes per seed");
  run_cmd->add_option("--trace-episodes", run_args.trace_episodes, "evaluation episodes per seed dumped step by step");
  run_cmd->add_option("--checkpoint-every", run_args.checkpoint_every, "training episodes between checkpoints");
  run_cmd->add_option("--jobs", run_args.jobs, "seeds trained concurrently");
  run_cmd->add_option("--config", run_args.config, "scenario JSON replacing the generated layout");
  run_cmd->add_flag("--quiet", run_args.quiet, "no progress output");

  auto* topo_cmd = app.add_subcommand("topo", "Topology utilities");
  topo_cmd->require_subcommand(1);
  std::string word;
  int strands = 0;
  auto* braid_cmd = topo_cmd->add_subcommand("debug-braid", "Simplify a braid word and show the rewrite trace");
  braid_cmd->add_option("--word", word, "tokens s<i> (sigma_i) and S<i> (inverse)")->required();
  braid_cmd->add_option("--strands", strands, "strand count (default: smallest sufficient)");

  std::string trace_path;
  std::string fixture = "v1";
  auto* val_cmd = app.add_subcommand("validate-schedule", "Check traced process intervals against a schedule fixture");
  val_cmd->add_option("--trace", trace_path, "trace.jsonl or a file of process records")->required();
  val_cmd->add_option("--fixture", fixture, "v1 | v2 | v3 | v4")->check(CLI::IsMember({"v1", "v2", "v3", "v4"}));

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return do_run(run_args);
    if (*braid_cmd) return do_debug_braid(word, strands);
    if (*val_cmd) return do_validate(trace_path, fixture);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
