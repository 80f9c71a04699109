#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/mpc.hpp"

namespace stlmpc {

// Coarse pipeline commands shared by the CLI and the C API. Unset numeric
// options (0, or -1 where 0 is meaningful) resolve against the config file,
// then the per-environment benchmark defaults.

struct CollectOptions {
  std::string env_id;
  std::string config_path;
  int n_traj = 0;
  int episode_len = 0;
  std::uint64_t seed = 0;
  std::string out_path;
};

struct CollectOutcome {
  std::string dataset_path;
  std::string manifest_path;
  std::size_t n_transitions = 0;
};

CollectOutcome cmd_collect(const CollectOptions& opts);

struct TrainOptions {
  std::string dataset_path;
  std::string config_path;
  std::vector<int> hidden;     // empty: config, then 256,256
  double learning_rate = 0;    // 0: unset
  double momentum = -1;        // <0: unset
  int batch_size = 0;
  int epochs = 0;
  double split_fraction = 0;
  std::uint64_t seed = 0;
  std::string out_path;  // checkpoint JSON
};

struct TrainOutcome {
  std::string checkpoint_path;
  std::string loss_curve_path;
  std::string manifest_path;
  double final_train_loss = 0;
  double final_val_loss = 0;
  int epochs = 0;
};

TrainOutcome cmd_train(const TrainOptions& opts);

struct RunOptions {
  std::string env_id;
  std::string checkpoint_path;
  std::string spec_text;  // empty: config, then benchmark default
  std::string config_path;
  int horizon = 0;
  int n_iter = 0;
  int n_samples = -1;  // -1: unset; 0: optimizer default population
  double sigma0 = 0;
  int action_repeat = 0;  // <= 0: default
  bool cold_start = false;
  int episodes = 1;
  int max_steps = 0;
  std::uint64_t seed = 0;
  std::string out_dir;
  bool emit_plot_data = false;
};

struct EpisodeSummary {
  int index = 0;
  std::uint64_t seed = 0;
  int steps = 0;
  double rho = 0;
  double reward = 0;
  bool has_reward = false;
  bool done_early = false;
};

struct RunOutcome {
  std::vector<EpisodeSummary> episodes;
  double rho_mean = 0, rho_std = 0;
  double reward_mean = 0, reward_std = 0;
  bool has_reward = false;
  std::string out_dir;
  std::string summary_path;
  std::string episodes_path;
  std::string manifest_path;
};

RunOutcome cmd_run(const RunOptions& opts);

struct CheckOptions {
  std::string spec_text;  // exactly one of spec_text / spec_path
  std::string spec_path;
  std::string trace_path;
};

struct CheckOutcome {
  double rho = 0;
  bool sat = false;
  std::string canonical_spec;
};

CheckOutcome cmd_check_spec(const CheckOptions& opts);

struct BenchOptions {
  std::string out_dir;
  std::uint64_t seed = 0;
  int episodes = 30;
  double scale = 1.0;  // multiplies n_traj and n_samples for desk-scale runs
  std::vector<std::string> env_ids;  // empty: the full suite
};

struct BenchRow {
  std::string env_id;
  bool skipped = false;  // out-of-scope rows (external physics engine)
  std::string note;
  int n_traj = 0, n_iter = 0, n_samples = 0, horizon = 0;
  double rho_mean = 0, rho_std = 0;
  double reward_mean = 0, reward_std = 0;
  bool has_reward = false;
  double paper_rho_mean = 0, paper_rho_std = 0;
  double paper_reward_mean = 0, paper_reward_std = 0;
  bool paper_has_reward = false;
};

struct BenchOutcome {
  std::vector<BenchRow> rows;
  std::string table_csv_path;
  std::string table_txt_path;
  std::string manifest_path;
};

BenchOutcome cmd_bench(const BenchOptions& opts);

/// Episode-level parallelism cap from STL_MPC_THREADS (default 1).
int thread_budget();

std::uint64_t fnv1a64(std::string_view s);

}  // namespace stlmpc
