// Command-line front end; all library access goes through the C API.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stlmpc/stlmpc.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

int exit_code_for(stlmpc_status st) {
  switch (st) {
    case STLMPC_OK:
      return kExitOk;
    case STLMPC_ERR_INVALID_ARGUMENT:
    case STLMPC_ERR_PARSE:
    case STLMPC_ERR_DIMENSION:
    case STLMPC_ERR_UNKNOWN_NAME:
      return kExitUsage;
    default:
      return kExitRuntime;
  }
}

int report(stlmpc_status st) {
  if (st == STLMPC_OK) return kExitOk;
  std::cerr << "error: " << stlmpc_last_error() << "\n";
  return exit_code_for(st);
}

const char* or_null(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"STL-robustness model-predictive control pipeline"};
  app.set_version_flag("--version", std::string(stlmpc_version()));
  app.require_subcommand(1);

  // collect ------------------------------------------------------------
  std::string c_env, c_config, c_out = "dataset.csv";
  int c_n_traj = 0, c_episode_len = 0;
  std::uint64_t c_seed = 0;
  auto* collect = app.add_subcommand("collect", "Sample random-exploration transitions");
  collect->add_option("env", c_env, "Environment id")->required();
  collect->add_option("--n-traj", c_n_traj, "Number of exploration episodes")
      ->check(CLI::PositiveNumber);
  collect->add_option("--episode-len", c_episode_len, "Max steps per episode")
      ->check(CLI::PositiveNumber);
  collect->add_option("--seed", c_seed, "Seed");
  collect->add_option("--config", c_config, "Config file");
  collect->add_option("--out", c_out, "Dataset CSV path");

  // train --------------------------------------------------------------
  std::string t_dataset, t_config, t_out = "model.json";
  std::vector<int> t_hidden;
  double t_lr = 0, t_momentum = -1, t_split = 0;
  int t_batch = 0, t_epochs = 0;
  std::uint64_t t_seed = 0;
  auto* train = app.add_subcommand("train", "Fit the neural dynamics model");
  train->add_option("dataset", t_dataset, "Dataset CSV")->required();
  train->add_option("--hidden", t_hidden, "Hidden layer sizes")->delimiter(',');
  train->add_option("--lr", t_lr, "Learning rate")->check(CLI::PositiveNumber);
  train->add_option("--momentum", t_momentum, "SGD momentum")->check(CLI::Range(0.0, 1.0));
  train->add_option("--batch-size", t_batch, "Mini-batch size")->check(CLI::PositiveNumber);
  train->add_option("--epochs", t_epochs, "Training epochs")->check(CLI::PositiveNumber);
  train->add_option("--split", t_split, "Train fraction")->check(CLI::Range(0.0, 1.0));
  train->add_option("--seed", t_seed, "Seed");
  train->add_option("--config", t_config, "Config file");
  train->add_option("--out", t_out, "Checkpoint JSON path");

  // run ----------------------------------------------------------------
  std::string r_env, r_checkpoint, r_spec, r_spec_file, r_config, r_out = "run_out";
  int r_horizon = 0, r_n_iter = 0, r_n_samples = -1, r_episodes = 1, r_max_steps = 0;
  int r_action_repeat = 0;
  double r_sigma0 = 0;
  bool r_cold = false, r_plot = false;
  std::uint64_t r_seed = 0;
  auto* run = app.add_subcommand("run", "Closed-loop MPC episodes against the learned model");
  run->add_option("env", r_env, "Environment id")->required();
  run->add_option("checkpoint", r_checkpoint, "Model checkpoint JSON")->required();
  auto* spec_opt = run->add_option("--spec", r_spec, "STL spec text");
  run->add_option("--spec-file", r_spec_file, "STL spec file")->excludes(spec_opt);
  run->add_option("--horizon", r_horizon, "Planning horizon")->check(CLI::PositiveNumber);
  run->add_option("--n-iter", r_n_iter, "Optimizer generations per step")
      ->check(CLI::PositiveNumber);
  run->add_option("--n-samples", r_n_samples, "Optimizer population (0 = auto)")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--sigma0", r_sigma0, "Initial step size")->check(CLI::PositiveNumber);
  run->add_option("--action-repeat", r_action_repeat,
                  "Model steps each planned action is held for")
      ->check(CLI::PositiveNumber);
  run->add_flag("--cold-start", r_cold, "Re-center the optimizer every step");
  run->add_option("--episodes", r_episodes, "Episode count")->check(CLI::PositiveNumber);
  run->add_option("--max-steps", r_max_steps, "Episode step cap")->check(CLI::PositiveNumber);
  run->add_option("--seed", r_seed, "Seed");
  run->add_option("--config", r_config, "Config file");
  run->add_option("--out", r_out, "Output directory");
  run->add_flag("--emit-plot-data", r_plot, "Write per-step planning logs");

  // check-spec -----------------------------------------------------------
  std::string k_spec, k_spec_file, k_trace;
  auto* check = app.add_subcommand("check-spec", "Evaluate a spec against a trace CSV");
  auto* k_spec_opt = check->add_option("--spec", k_spec, "STL spec text");
  check->add_option("--spec-file", k_spec_file, "STL spec file")->excludes(k_spec_opt);
  check->add_option("--trace-file", k_trace, "Trace CSV")->required();

  // bench ----------------------------------------------------------------
  std::string b_suite = "table1", b_out = "bench_out";
  std::vector<std::string> b_envs;
  int b_episodes = 30;
  double b_scale = 1.0;
  std::uint64_t b_seed = 0;
  auto* bench = app.add_subcommand("bench", "Reproduce the published benchmark table");
  bench->add_option("--suite", b_suite, "Benchmark suite")->check(CLI::IsMember({"table1"}));
  bench->add_option("--env", b_envs, "Restrict to specific environments");
  bench->add_option("--episodes", b_episodes, "Episodes per environment")
      ->check(CLI::PositiveNumber);
  bench->add_option("--scale", b_scale, "Budget scale for n_traj / n_samples")
      ->check(CLI::PositiveNumber);
  bench->add_option("--seed", b_seed, "Seed");
  bench->add_option("--out-dir", b_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  if (collect->parsed()) {
    stlmpc_collect_options o{};
    o.env_id = c_env.c_str();
    o.config_path = or_null(c_config);
    o.n_traj = c_n_traj;
    o.episode_len = c_episode_len;
    o.seed = c_seed;
    o.out_path = c_out.c_str();
    stlmpc_collect_result r{};
    const stlmpc_status st = stlmpc_collect(&o, &r);
    if (st != STLMPC_OK) return report(st);
    std::cout << "wrote " << r.n_transitions << " transitions to " << r.dataset_path << "\n"
              << "manifest: " << r.manifest_path << "\n";
    return kExitOk;
  }

  if (train->parsed()) {
    stlmpc_train_options o{};
    o.dataset_path = t_dataset.c_str();
    o.config_path = or_null(t_config);
    o.hidden = t_hidden.empty() ? nullptr : t_hidden.data();
    o.n_hidden = t_hidden.size();
    o.learning_rate = t_lr;
    o.momentum = t_momentum;
    o.batch_size = t_batch;
    o.epochs = t_epochs;
    o.split_fraction = t_split;
    o.seed = t_seed;
    o.out_path = t_out.c_str();
    stlmpc_train_result r{};
    const stlmpc_status st = stlmpc_train(&o, &r);
    if (st != STLMPC_OK) return report(st);
    std::printf("trained %d epochs: train loss %.6g, val loss %.6g\n", r.epochs,
                r.final_train_loss, r.final_val_loss);
    std::cout << "checkpoint: " << r.checkpoint_path << "\n"
              << "loss curve: " << r.loss_curve_path << "\n";
    return kExitOk;
  }

  if (run->parsed()) {
    std::string spec_text = r_spec;
    if (!r_spec_file.empty()) {
      std::ifstream f(r_spec_file);
      if (!f) {
        std::cerr << "error: cannot open spec file: " << r_spec_file << "\n";
        return kExitUsage;
      }
      std::stringstream buf;
      buf << f.rdbuf();
      spec_text = buf.str();
    }
    stlmpc_run_options o{};
    o.env_id = r_env.c_str();
    o.checkpoint_path = r_checkpoint.c_str();
    o.spec_text = or_null(spec_text);
    o.config_path = or_null(r_config);
    o.horizon = r_horizon;
    o.n_iter = r_n_iter;
    o.n_samples = r_n_samples;
    o.sigma0 = r_sigma0;
    o.action_repeat = r_action_repeat;
    o.cold_start = r_cold ? 1 : 0;
    o.episodes = r_episodes;
    o.max_steps = r_max_steps;
    o.seed = r_seed;
    o.out_dir = r_out.c_str();
    o.emit_plot_data = r_plot ? 1 : 0;
    stlmpc_run_result r{};
    const stlmpc_status st = stlmpc_run(&o, &r);
    if (st != STLMPC_OK) return report(st);
    std::printf("episodes: %d\nrho: %.6g +/- %.6g\n", r.episodes, r.rho_mean, r.rho_std);
    if (r.has_reward) {
      std::printf("reward: %.6g +/- %.6g\n", r.reward_mean, r.reward_std);
    } else {
      std::printf("reward: --\n");
    }
    std::cout << "summary: " << r.summary_path << "\n";
    return kExitOk;
  }

  if (check->parsed()) {
    stlmpc_check_options o{};
    o.spec_text = or_null(k_spec);
    o.spec_path = or_null(k_spec_file);
    o.trace_path = k_trace.c_str();
    stlmpc_check_result r{};
    const stlmpc_status st = stlmpc_check_spec(&o, &r);
    if (st != STLMPC_OK) return report(st);
    std::printf("spec: %s\nrho = %.17g\n%s\n", r.canonical_spec, r.rho, r.sat ? "SAT" : "UNSAT");
    return kExitOk;
  }

  if (bench->parsed()) {
    std::vector<const char*> env_ptrs;
    env_ptrs.reserve(b_envs.size());
    for (const std::string& e : b_envs) env_ptrs.push_back(e.c_str());
    stlmpc_bench_options o{};
    o.out_dir = b_out.c_str();
    o.seed = b_seed;
    o.episodes = b_episodes;
    o.scale = b_scale;
    o.env_ids = env_ptrs.empty() ? nullptr : env_ptrs.data();
    o.n_env_ids = env_ptrs.size();
    stlmpc_bench_result r{};
    const stlmpc_status st = stlmpc_bench(&o, &r);
    // Partial tables are still written on failure; show whatever exists.
    const std::string table_path =
        r.table_txt_path[0] ? std::string(r.table_txt_path) : b_out + "/bench_table.txt";
    std::ifstream table(table_path);
    if (table) std::cout << table.rdbuf();
    if (st != STLMPC_OK) return report(st);
    std::cout << "table: " << r.table_csv_path << "\n";
    return kExitOk;
  }

  return kExitUsage;
}
