// Command-line front end: offline solves, single learning runs, multi-seed
// benchmarks, an invariant check, and the bound dictionary.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "pdbps/envelope.hpp"
#include "pdbps/instance_io.hpp"
#include "pdbps/metrics.hpp"
#include "pdbps/oracle.hpp"
#include "pdbps/sweep.hpp"

namespace {

using namespace pdbps;
using nlohmann::json;

struct CommonArgs {
  std::string instance_path;
  std::string scenario_path;
  long num_episodes = 1024;
  double delta = 0.05;
  std::string mode = "paper";
  std::string xi = "pre";
  double practical_scale = 1.0;
  double practical_dual_step = 0.0;
  std::string out_dir = ".";
  bool want_csv = false;
  bool want_json = false;
};

// Small bundled instance and scenario so `check` and quick experiments work
// without files: three layers of width 1/2/2, two actions, one constraint
// whose violating action is also the rewarding one.
LoopFreeCmdp bundled_instance() {
  return LoopFreeCmdp({{0}, {1, 2}, {3, 4}, {5}}, 2,
                      {
                          {0.9, 0.1},
                          {0.1, 0.9},
                          {0.85, 0.15},
                          {0.3, 0.7},
                          {0.6, 0.4},
                          {0.2, 0.8},
                          {1.0},
                          {1.0},
                          {1.0},
                          {1.0},
                      },
                      1);
}

json bundled_scenario_json() {
  const std::vector<double> reward_means = {0.9, 0.2, 0.8, 0.3, 0.5,
                                            0.2, 0.9, 0.1, 0.4, 0.3};
  const std::vector<double> constraint_means = {0.8, -0.9, 0.5, -0.5, 0.3,
                                                -0.3, -0.2, -0.2, -0.2, -0.2};
  return json{
      {"rewards", {{"kind", "stochastic"}, {"dist", "bernoulli"}, {"means", reward_means}}},
      {"constraints", {{"kind", "stochastic"}, {"means", json::array({constraint_means})}}},
  };
}

LoopFreeCmdp load_instance_or_bundled(const std::string& path) {
  if (path.empty()) return bundled_instance();
  return load_instance(path);
}

Scenario load_scenario_or_bundled(const LoopFreeCmdp& mdp, const std::string& path) {
  if (path.empty()) return Scenario::from_json(mdp, bundled_scenario_json());
  std::ifstream in(path);
  if (!in) throw StructuralError("scenario: cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ValidationError("scenario: malformed JSON in " + path + ": " + e.what());
  }
  return Scenario::from_json(mdp, doc);
}

RunConfig make_config(const CommonArgs& args, std::uint64_t seed) {
  RunConfig cfg;
  cfg.num_episodes = args.num_episodes;
  cfg.delta = args.delta;
  cfg.mode = args.mode == "paper" ? ConstantMode::Paper : ConstantMode::Practical;
  cfg.practical_scale = args.practical_scale;
  cfg.practical_dual_step = args.practical_dual_step;
  cfg.xi_variant = args.xi == "pre" ? XiVariant::PreUpdateShift : XiVariant::PostUpdateShift;
  cfg.seed = seed;
  return cfg;
}

struct Baselines {
  OracleSolution oracle;
  std::optional<double> weak_value;
  bool weak_infeasible = false;
};

// Strong baseline always; weak baseline only for adversarial constraints,
// where it can be infeasible without affecting the strong metrics.
Baselines solve_baselines(const LoopFreeCmdp& mdp, const Scenario& scenario,
                          const RunRecord* realized, long num_episodes) {
  RewardVector rbar;
  if (scenario.adaptive()) {
    if (realized == nullptr || realized->reward_sum.empty())
      throw StructuralError("baselines: adaptive rewards need a finished run");
    std::vector<double> mean = realized->reward_sum;
    for (double& v : mean) v /= static_cast<double>(num_episodes);
    rbar = RewardVector(std::move(mean));
  } else {
    rbar = scenario.mean_reward(num_episodes);
  }
  Baselines out{solve_oracle(mdp, rbar, scenario.mean_constraints(num_episodes), num_episodes),
                std::nullopt, false};
  if (!scenario.constraints_stochastic()) {
    try {
      const auto seq = scenario.constraint_sequence(num_episodes);
      out.weak_value = solve_weak_opt(mdp, rbar, seq).value;
    } catch (const InfeasibleError&) {
      out.weak_infeasible = true;
    }
  }
  return out;
}

json metrics_summary(const Metrics& m, const Baselines& base) {
  json doc;
  doc["num_episodes"] = m.num_episodes;
  doc["total_reward"] = m.total_reward;
  doc["opt_strong"] = m.opt_strong;
  doc["regret_strong"] = m.regret_strong;
  doc["violation_max"] = m.violation_max;
  doc["worst_constraint"] = m.worst_constraint + 1;
  doc["competitive_ratio"] = m.competitive_ratio;
  doc["rho"] = base.oracle.rho;
  doc["condition2_holds"] = base.oracle.condition2_holds;
  if (std::isinf(base.oracle.lambda_cap))
    doc["lambda_cap"] = "inf";
  else
    doc["lambda_cap"] = base.oracle.lambda_cap;
  if (m.opt_weak.has_value()) {
    doc["opt_weak"] = *m.opt_weak;
    doc["regret_weak"] = *m.regret_weak;
  } else if (base.weak_infeasible) {
    doc["weak_baseline"] = "infeasible";
  }
  return doc;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StructuralError("cannot open " + path.string() + " for writing");
  out << contents;
}

int cmd_solve(const CommonArgs& args) {
  const auto mdp = load_instance_or_bundled(args.instance_path);
  const auto scenario = load_scenario_or_bundled(mdp, args.scenario_path);
  const auto base = solve_baselines(mdp, scenario, nullptr, args.num_episodes);

  json doc;
  doc["opt_value"] = base.oracle.opt_value;
  doc["rho"] = base.oracle.rho;
  doc["rho_raw"] = base.oracle.rho_raw;
  if (std::isinf(base.oracle.lambda_cap))
    doc["lambda_cap"] = "inf";
  else
    doc["lambda_cap"] = base.oracle.lambda_cap;
  doc["condition2_holds"] = base.oracle.condition2_holds;
  doc["q_star"] = base.oracle.q_star.q2;
  doc["q_circ"] = base.oracle.q_circ.q2;
  if (base.weak_value.has_value()) doc["opt_weak"] = *base.weak_value;
  if (base.weak_infeasible) doc["weak_baseline"] = "infeasible";
  std::cout << doc.dump(2) << '\n';
  return 0;
}

int cmd_run(const CommonArgs& args, std::uint64_t seed) {
  const auto mdp = load_instance_or_bundled(args.instance_path);
  const auto scenario = load_scenario_or_bundled(mdp, args.scenario_path);
  auto cfg = make_config(args, seed);
  std::optional<Baselines> pre;
  if (!scenario.adaptive()) {
    // The multiplier cap is only a high-probability bound, and only under
    // the margin condition; excursions are counted rather than fatal.
    pre = solve_baselines(mdp, scenario, nullptr, args.num_episodes);
    if (pre->oracle.condition2_holds) cfg.lambda_cap_soft = pre->oracle.lambda_cap;
  }
  const auto record = run(mdp, scenario, cfg);
  const auto base =
      pre.has_value() ? *pre : solve_baselines(mdp, scenario, &record, args.num_episodes);
  const auto metrics = compute_metrics(record, base.oracle.opt_value, base.weak_value);

  std::filesystem::create_directories(args.out_dir);
  const bool both = !args.want_csv && !args.want_json;
  if (args.want_csv || both) {
    std::ostringstream csv;
    write_run_csv(csv, record, base.oracle.opt_value, base.weak_value);
    write_file(std::filesystem::path(args.out_dir) /
                   ("run_seed" + std::to_string(seed) + ".csv"),
               csv.str());
  }
  if (args.want_json || both) {
    auto doc = metrics_summary(metrics, base);
    doc["seed"] = seed;
    doc["soft_lambda_breaches"] = record.soft_lambda_breaches;
    write_file(std::filesystem::path(args.out_dir) / "summary.json", doc.dump(2) + "\n");
  }
  std::cout << "regret_strong=" << format_double(metrics.regret_strong)
            << " violation_max=" << format_double(metrics.violation_max) << '\n';
  return 0;
}

int cmd_bench(const CommonArgs& args, int num_seeds, int threads, bool per_run_csv) {
  const auto mdp = load_instance_or_bundled(args.instance_path);
  const auto scenario = load_scenario_or_bundled(mdp, args.scenario_path);

  auto cfg = make_config(args, 0);
  cfg.record_occupancies = false;
  std::optional<Baselines> pre;
  if (!scenario.adaptive()) {
    pre = solve_baselines(mdp, scenario, nullptr, args.num_episodes);
    if (pre->oracle.condition2_holds) cfg.lambda_cap_soft = pre->oracle.lambda_cap;
  }
  std::vector<std::uint64_t> seeds;
  for (int s = 1; s <= num_seeds; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
  const auto records = seed_sweep(mdp, scenario, cfg, seeds, threads);
  const auto base = pre.has_value()
                        ? *pre
                        : solve_baselines(mdp, scenario,
                                          records.empty() ? nullptr : &records[0],
                                          args.num_episodes);

  std::vector<std::vector<double>> regret_curves, violpos_curves, lambda_curves;
  std::vector<Metrics> all_metrics;
  for (const auto& record : records) {
    auto m = compute_metrics(record, base.oracle.opt_value, base.weak_value);
    regret_curves.push_back(m.cum_regret_strong);
    // Positive part of the worst cumulative signed violation (V_t clamped).
    std::vector<double> worst_pos(record.episodes.size(), 0.0);
    for (std::size_t t = 0; t < record.episodes.size(); ++t)
      for (const auto& curve : m.cum_violation)
        worst_pos[t] = std::max(worst_pos[t], std::max(0.0, curve[t]));
    violpos_curves.push_back(std::move(worst_pos));
    std::vector<double> lambda(record.episodes.size());
    for (std::size_t t = 0; t < record.episodes.size(); ++t)
      lambda[t] = record.episodes[t].lambda_l1;
    lambda_curves.push_back(std::move(lambda));
    all_metrics.push_back(std::move(m));
  }

  const auto regret_agg = aggregate_curves(regret_curves);
  const auto violpos_agg = aggregate_curves(violpos_curves);
  const auto lambda_agg = aggregate_curves(lambda_curves);

  std::filesystem::create_directories(args.out_dir);
  {
    std::ostringstream csv;
    write_aggregate_csv(csv, regret_agg, violpos_agg, lambda_agg);
    write_file(std::filesystem::path(args.out_dir) / "aggregate.csv", csv.str());
  }
  if (per_run_csv) {
    for (std::size_t s = 0; s < records.size(); ++s) {
      std::ostringstream csv;
      write_run_csv(csv, records[s], base.oracle.opt_value, base.weak_value);
      write_file(std::filesystem::path(args.out_dir) /
                     ("run_seed" + std::to_string(seeds[s]) + ".csv"),
                 csv.str());
    }
  }

  json doc;
  {
    const long T = args.num_episodes;
    double mean_final_regret = 0.0, mean_final_violation = 0.0, mean_ratio = 0.0;
    for (const auto& m : all_metrics) {
      mean_final_regret += m.regret_strong;
      mean_final_violation += m.violation_max;
      mean_ratio += m.competitive_ratio;
    }
    doc["num_seeds"] = num_seeds;
    doc["num_episodes"] = T;
    doc["mean_final_regret_strong"] = mean_final_regret / num_seeds;
    doc["mean_final_violation"] = mean_final_violation / num_seeds;
    doc["mean_competitive_ratio"] = mean_ratio / num_seeds;
    if (base.weak_value.has_value()) {
      double mean_weak = 0.0;
      for (const auto& m : all_metrics) mean_weak += *m.regret_weak;
      doc["mean_final_regret_weak"] = mean_weak / num_seeds;
    } else if (base.weak_infeasible) {
      doc["weak_baseline"] = "infeasible";
    }
    if (T >= 64) {
      const auto rslope = slope_fit(regret_agg.mean, std::max<long>(32, T / 64), T);
      const auto vslope = slope_fit(violpos_agg.mean, std::max<long>(32, T / 64), T);
      doc["regret_slope"] = {{"slope", rslope.slope}, {"std_error", rslope.std_error}};
      doc["violation_slope"] = {{"slope", vslope.slope}, {"std_error", vslope.std_error}};
    }
    doc["condition2_holds"] = base.oracle.condition2_holds;
    doc["envelope"] =
        envelope_to_json(envelope(mdp.num_states(), mdp.num_actions(), mdp.horizon(),
                                  mdp.num_constraints(), T, args.delta, base.oracle.rho));
  }
  write_file(std::filesystem::path(args.out_dir) / "summary.json", doc.dump(2) + "\n");
  std::cout << "wrote " << args.out_dir << "/aggregate.csv and summary.json\n";
  return 0;
}

int cmd_envelope(const CommonArgs& args, double rho_flag) {
  const auto mdp = load_instance_or_bundled(args.instance_path);
  double rho = rho_flag;
  if (!args.scenario_path.empty()) {
    const auto scenario = load_scenario_or_bundled(mdp, args.scenario_path);
    rho = solve_rho(mdp, scenario.mean_constraints(args.num_episodes)).rho;
  }
  const auto env = envelope(mdp.num_states(), mdp.num_actions(), mdp.horizon(),
                            mdp.num_constraints(), args.num_episodes, args.delta, rho);
  std::cout << envelope_to_json(env).dump(2) << '\n';
  return 0;
}

int cmd_check(const CommonArgs& args) {
  const auto mdp = load_instance_or_bundled(args.instance_path);
  const auto scenario = load_scenario_or_bundled(mdp, args.scenario_path);
  int failures = 0;
  auto report = [&](bool ok, const std::string& what) {
    std::cout << (ok ? "ok:   " : "FAIL: ") << what << '\n';
    if (!ok) ++failures;
  };

  const long T = std::min<long>(args.num_episodes, 256);
  for (const char* mode : {"paper", "practical"}) {
    CommonArgs local = args;
    local.mode = mode;
    local.num_episodes = T;
    auto cfg = make_config(local, 7);
    RunRecord record;
    bool completed = true;
    try {
      record = run(mdp, scenario, cfg);
    } catch (const std::exception& e) {
      completed = false;
      report(false, std::string("run completes in ") + mode + " mode: " + e.what());
    }
    if (!completed) continue;
    report(true, std::string("run completes in ") + mode +
                     " mode (loss range, floor, box, increment asserted inline)");

    bool shift_ok = true, range_ok = true, caps_ok = true, floor_ok = true;
    double last_range = 0.0, max_shift = 0.0;
    for (const auto& ep : record.episodes) {
      shift_ok = shift_ok && std::abs(ep.shift - (1.0 + ep.lambda_l1)) <= 1e-12;
      range_ok = range_ok && ep.loss_range >= std::max(2.0, last_range) &&
                 ep.loss_range >= 2.0 * max_shift - 1e-12;
      last_range = std::max(last_range, ep.loss_range);
      max_shift = std::max(max_shift, ep.shift);
      caps_ok = caps_ok && ep.learning_rate * ep.max_q_estimate <= 0.5 + 1e-9;
      floor_ok = floor_ok && ep.floor_margin >= 0.0;
    }
    report(shift_ok, std::string(mode) + ": shift tracks 1 + |lambda|_1");
    report(range_ok, std::string(mode) + ": range starts at 2, monotone, covers shifts");
    report(caps_ok, std::string(mode) + ": learning_rate * q_estimate <= 1/2");
    report(floor_ok, std::string(mode) + ": policy floor respected");

    const auto replay = run(mdp, scenario, cfg);
    bool identical = replay.episodes.size() == record.episodes.size();
    for (std::size_t t = 0; identical && t < replay.episodes.size(); ++t)
      identical = replay.episodes[t].reward_exact == record.episodes[t].reward_exact &&
                  replay.episodes[t].lambda_l1 == record.episodes[t].lambda_l1;
    report(identical, std::string(mode) + ": replay with the same seed is identical");
  }

  try {
    const auto base = solve_baselines(mdp, scenario, nullptr, T);
    report(base.oracle.rho >= 0.0 && base.oracle.rho <= mdp.horizon() + 1e-9,
           "feasibility margin lies in [0, H]");
    base.oracle.q_star.validate(mdp);
    base.oracle.q_circ.validate(mdp);
    report(true, "oracle occupancies are valid");
  } catch (const std::exception& e) {
    report(false, std::string("oracle: ") + e.what());
  }

  std::cout << (failures == 0 ? "check passed\n" : "check failed\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Primal-dual bandit policy search for constrained episodic MDPs"};
  app.require_subcommand(1);

  CommonArgs args;
  std::uint64_t seed = 1;
  int num_seeds = 10;
  int threads = 0;
  bool per_run_csv = false;
  double rho_flag = 0.0;

  auto add_common = [&](CLI::App* cmd, bool needs_run_params) {
    cmd->add_option("--instance", args.instance_path, "Instance JSON (bundled when omitted)");
    cmd->add_option("--scenario", args.scenario_path, "Scenario JSON (bundled when omitted)");
    cmd->add_option("--T", args.num_episodes, "Number of episodes")->check(CLI::PositiveNumber);
    cmd->add_option("--delta", args.delta, "Confidence parameter in (0,1)");
    if (needs_run_params) {
      cmd->add_option("--mode", args.mode, "Constant scale: paper or practical")
          ->check(CLI::IsMember({"paper", "practical"}));
      cmd->add_option("--xi", args.xi, "Loss-range recurrence: pre or post")
          ->check(CLI::IsMember({"pre", "post"}));
      cmd->add_option("--practical-scale", args.practical_scale,
                      "Primal scale constant in practical mode");
      cmd->add_option("--dual-step", args.practical_dual_step,
                      "Dual step size in practical mode (0 = 1/sqrt(T))");
      cmd->add_option("--out", args.out_dir, "Output directory");
      cmd->add_flag("--csv", args.want_csv, "Write CSV output only");
      cmd->add_flag("--json", args.want_json, "Write JSON output only");
    }
  };

  auto* solve = app.add_subcommand("solve", "Solve the offline baselines for a scenario");
  add_common(solve, false);

  auto* run_cmd = app.add_subcommand("run", "One learning run");
  add_common(run_cmd, true);
  run_cmd->add_option("--seed", seed, "Run seed");

  auto* bench = app.add_subcommand("bench", "Multi-seed sweep with aggregation");
  add_common(bench, true);
  bench->add_option("--seeds", num_seeds, "Number of seeds (ids 1..N)")
      ->check(CLI::PositiveNumber);
  bench->add_option("--threads", threads, "Worker threads (0 = hardware)");
  bench->add_flag("--per-run-csv", per_run_csv, "Also write one CSV per seed");

  auto* check = app.add_subcommand("check", "Invariant suite on a short run");
  add_common(check, true);

  auto* env = app.add_subcommand("envelope", "Print the bound dictionary");
  add_common(env, false);
  env->add_option("--rho", rho_flag, "Feasibility margin (ignored when --scenario is given)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(args);
    if (run_cmd->parsed()) return cmd_run(args, seed);
    if (bench->parsed()) return cmd_bench(args, num_seeds, threads, per_run_csv);
    if (check->parsed()) return cmd_check(args);
    if (env->parsed()) return cmd_envelope(args, rho_flag);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
