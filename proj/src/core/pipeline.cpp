#include "core/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "core/config.hpp"
#include "core/dynamics.hpp"
#include "core/stl.hpp"

namespace fs = std::filesystem;

namespace stlmpc {

using json = nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt4(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string file_hash_hex(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::io, "cannot hash missing file: " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return hex64(fnv1a64(buf.str()));
}

std::string iso_now_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void ensure_parent_dir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

void write_text_file(const std::string& path, const std::string& content) {
  ensure_parent_dir(path);
  std::ofstream f(path);
  if (!f) fail(ErrorCode::io, "cannot open for writing: " + path);
  f << content;
  if (!f) fail(ErrorCode::io, "write failed: " + path);
}

// The manifest is the only artifact carrying a wall-clock timestamp; every
// result file must be byte-identical across reruns with the same inputs.
void write_manifest(const std::string& path, const std::string& command, const json& inputs,
                    const std::vector<std::string>& outputs) {
  json j;
  j["command"] = command;
  j["created_utc"] = iso_now_utc();
  j["inputs"] = inputs;
  j["input_hash"] = hex64(fnv1a64(inputs.dump()));
  json outs = json::array();
  for (const std::string& p : outputs) {
    outs.push_back({{"path", p}, {"content_hash", file_hash_hex(p)}});
  }
  j["outputs"] = std::move(outs);
  write_text_file(path, j.dump(2) + "\n");
}

std::pair<double, double> mean_sample_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

Config load_optional_config(const std::string& path) {
  return path.empty() ? Config{} : Config::load(path);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

int thread_budget() {
  const char* v = std::getenv("STL_MPC_THREADS");
  if (!v || !*v) return 1;
  const long n = std::strtol(v, nullptr, 10);
  return static_cast<int>(std::clamp(n, 1L, 256L));
}

// ---------------------------------------------------------------------------

CollectOutcome cmd_collect(const CollectOptions& opts) {
  if (opts.env_id.empty()) fail(ErrorCode::invalid_argument, "collect: env id required");
  if (opts.out_path.empty()) fail(ErrorCode::invalid_argument, "collect: output path required");
  const Config cfg = load_optional_config(opts.config_path);
  const EnvSpecBundle bundle = default_bundle(opts.env_id);

  const int n_traj = opts.n_traj > 0 ? opts.n_traj : cfg.get_int("n_traj", bundle.n_traj);
  const int default_len = bundle.collect_len > 0 ? bundle.collect_len : bundle.episode_len;
  const int episode_len =
      opts.episode_len > 0 ? opts.episode_len : cfg.get_int("episode_len", default_len);
  const std::uint64_t seed = opts.seed != 0 ? opts.seed : cfg.get_u64("seed", 0);
  if (n_traj < 1) fail(ErrorCode::invalid_argument, "collect: n_traj must be >= 1");
  if (episode_len < 1) fail(ErrorCode::invalid_argument, "collect: episode_len must be >= 1");

  auto env = make_env(opts.env_id, cfg.env_overrides());
  const Dataset ds = collect(*env, n_traj, episode_len, seed);

  ensure_parent_dir(opts.out_path);
  save_dataset_csv(ds, opts.out_path);

  CollectOutcome out;
  out.dataset_path = opts.out_path;
  out.n_transitions = ds.size();
  out.manifest_path = opts.out_path + ".manifest.json";
  json inputs = {{"env", opts.env_id},     {"n_traj", n_traj}, {"episode_len", episode_len},
                 {"seed", seed},           {"config", opts.config_path}};
  write_manifest(out.manifest_path, "collect", inputs, {out.dataset_path});
  return out;
}

// ---------------------------------------------------------------------------

TrainOutcome cmd_train(const TrainOptions& opts) {
  if (opts.dataset_path.empty()) fail(ErrorCode::invalid_argument, "train: dataset path required");
  if (opts.out_path.empty()) fail(ErrorCode::invalid_argument, "train: output path required");
  const Config cfg = load_optional_config(opts.config_path);

  const Dataset ds = load_dataset_csv(opts.dataset_path);

  TrainConfig tc;
  tc.hidden_sizes = !opts.hidden.empty() ? opts.hidden : cfg.get_int_list("hidden", tc.hidden_sizes);
  tc.learning_rate = opts.learning_rate > 0 ? opts.learning_rate : cfg.get_double("lr", tc.learning_rate);
  tc.momentum = opts.momentum >= 0 ? opts.momentum : cfg.get_double("momentum", tc.momentum);
  tc.batch_size = opts.batch_size > 0 ? opts.batch_size : cfg.get_int("batch_size", tc.batch_size);
  tc.epochs = opts.epochs > 0 ? opts.epochs : cfg.get_int("epochs", tc.epochs);
  tc.split_fraction =
      opts.split_fraction > 0 ? opts.split_fraction : cfg.get_double("split", tc.split_fraction);
  tc.seed = opts.seed != 0 ? opts.seed : cfg.get_u64("seed", 0);

  // Small datasets: shrink the batch rather than reject.
  const auto n_train = static_cast<int>(
      std::ceil(tc.split_fraction * static_cast<double>(ds.size())));
  if (tc.batch_size > n_train) tc.batch_size = std::max(1, n_train);

  LossCurve curve;
  const DynamicsModel model = train(ds, tc, &curve);

  ensure_parent_dir(opts.out_path);
  save_checkpoint(model, tc, opts.out_path);

  TrainOutcome out;
  out.checkpoint_path = opts.out_path;
  out.epochs = tc.epochs;
  out.final_train_loss = curve.train.back();
  out.final_val_loss = curve.val.back();

  std::string curve_csv = "epoch,train_loss,val_loss\n";
  for (std::size_t e = 0; e < curve.train.size(); ++e) {
    curve_csv += std::to_string(e + 1) + "," + fmt17(curve.train[e]) + "," + fmt17(curve.val[e]) + "\n";
  }
  out.loss_curve_path = opts.out_path + ".loss.csv";
  write_text_file(out.loss_curve_path, curve_csv);

  out.manifest_path = opts.out_path + ".manifest.json";
  json inputs = {{"dataset", opts.dataset_path},
                 {"dataset_hash", file_hash_hex(opts.dataset_path)},
                 {"hidden", tc.hidden_sizes},
                 {"lr", tc.learning_rate},
                 {"momentum", tc.momentum},
                 {"batch_size", tc.batch_size},
                 {"epochs", tc.epochs},
                 {"split", tc.split_fraction},
                 {"seed", tc.seed},
                 {"config", opts.config_path}};
  write_manifest(out.manifest_path, "train", inputs, {out.checkpoint_path, out.loss_curve_path});
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string episode_json_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "episode_%03d.json", i);
  return buf;
}

std::string plan_log_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "plan_log_%03d.csv", i);
  return buf;
}

}  // namespace

RunOutcome cmd_run(const RunOptions& opts) {
  if (opts.env_id.empty()) fail(ErrorCode::invalid_argument, "run: env id required");
  if (opts.checkpoint_path.empty()) fail(ErrorCode::invalid_argument, "run: checkpoint required");
  if (opts.out_dir.empty()) fail(ErrorCode::invalid_argument, "run: output directory required");
  if (opts.episodes < 1) fail(ErrorCode::invalid_argument, "run: episodes must be >= 1");

  const Config cfg = load_optional_config(opts.config_path);
  const EnvSpecBundle bundle = default_bundle(opts.env_id);
  const auto overrides = cfg.env_overrides();

  const DynamicsModel model = load_checkpoint(opts.checkpoint_path);
  const std::string spec_text =
      !opts.spec_text.empty() ? opts.spec_text : cfg.get("spec", bundle.spec_text);
  const stl::FormulaPtr formula = stl::parse(spec_text);

  const auto probe = make_env(opts.env_id, overrides);
  if (model.state_dim != probe->state_dim() || model.action_dim != probe->action_dim()) {
    fail(ErrorCode::dimension, "run: checkpoint dims (" + std::to_string(model.state_dim) + "," +
                                   std::to_string(model.action_dim) + ") do not match env '" +
                                   opts.env_id + "'");
  }
  // Fails on unknown dimension names before any episode runs.
  [[maybe_unused]] const stl::BoundFormula validate_bind(*formula, probe->names());

  MpcConfig mpc;
  mpc.horizon = opts.horizon > 0 ? opts.horizon : cfg.get_int("horizon", bundle.horizon);
  mpc.n_iter = opts.n_iter > 0 ? opts.n_iter : cfg.get_int("n_iter", bundle.n_iter);
  mpc.n_samples = opts.n_samples >= 0 ? opts.n_samples : cfg.get_int("n_samples", bundle.n_samples);
  mpc.sigma0 = opts.sigma0 > 0 ? opts.sigma0 : cfg.get_double("sigma0", 0.5);
  mpc.action_repeat =
      opts.action_repeat > 0 ? opts.action_repeat : cfg.get_int("action_repeat", bundle.action_repeat);
  mpc.warm_start = opts.cold_start ? false : cfg.get_bool("warm_start", true);
  mpc.action_low = probe->action_low();
  mpc.action_high = probe->action_high();
  const int max_steps =
      opts.max_steps > 0 ? opts.max_steps : cfg.get_int("max_steps", bundle.episode_len);

  fs::create_directories(opts.out_dir);

  const int n_ep = opts.episodes;
  std::vector<EpisodeResult> results(static_cast<std::size_t>(n_ep));
  std::vector<std::uint64_t> ep_seeds(static_cast<std::size_t>(n_ep));
  for (int i = 0; i < n_ep; ++i) {
    ep_seeds[static_cast<std::size_t>(i)] = mix_seed(opts.seed, 0xE90000ULL + static_cast<std::uint64_t>(i));
  }

  const ModelPredictor predictor(model);
  auto run_one = [&](int i) {
    auto env = make_env(opts.env_id, overrides);
    MpcConfig c = mpc;
    c.seed = ep_seeds[static_cast<std::size_t>(i)];
    results[static_cast<std::size_t>(i)] =
        run_episode(*env, predictor, *formula, c, max_steps, ep_seeds[static_cast<std::size_t>(i)]);
  };

  const int threads = std::min(thread_budget(), n_ep);
  if (threads <= 1) {
    for (int i = 0; i < n_ep; ++i) run_one(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < n_ep; i = next.fetch_add(1)) run_one(i);
      });
    }
    for (std::thread& t : pool) t.join();
  }

  RunOutcome out;
  out.out_dir = opts.out_dir;
  std::vector<double> rhos, rewards;
  for (int i = 0; i < n_ep; ++i) {
    const EpisodeResult& ep = results[static_cast<std::size_t>(i)];
    EpisodeSummary s;
    s.index = i;
    s.seed = ep_seeds[static_cast<std::size_t>(i)];
    s.steps = static_cast<int>(ep.actions.size());
    s.rho = ep.rho;
    s.reward = ep.reward;
    s.has_reward = ep.has_reward;
    s.done_early = ep.done_early;
    out.episodes.push_back(s);
    rhos.push_back(ep.rho);
    if (ep.has_reward) {
      out.has_reward = true;
      rewards.push_back(ep.reward);
    }
  }
  std::tie(out.rho_mean, out.rho_std) = mean_sample_std(rhos);
  std::tie(out.reward_mean, out.reward_std) = mean_sample_std(rewards);

  std::vector<std::string> outputs;

  std::string ep_csv = "episode,seed,steps,rho,reward,done_early\n";
  for (const EpisodeSummary& s : out.episodes) {
    ep_csv += std::to_string(s.index) + "," + std::to_string(s.seed) + "," + std::to_string(s.steps) +
              "," + fmt17(s.rho) + "," + (s.has_reward ? fmt17(s.reward) : std::string("--")) + "," +
              (s.done_early ? "1" : "0") + "\n";
  }
  out.episodes_path = (fs::path(opts.out_dir) / "episodes.csv").string();
  write_text_file(out.episodes_path, ep_csv);
  outputs.push_back(out.episodes_path);

  std::string summary_csv = "env,episodes,rho_mean,rho_std,reward_mean,reward_std\n";
  summary_csv += opts.env_id + "," + std::to_string(n_ep) + "," + fmt17(out.rho_mean) + "," +
                 fmt17(out.rho_std) + "," +
                 (out.has_reward ? fmt17(out.reward_mean) : std::string("--")) + "," +
                 (out.has_reward ? fmt17(out.reward_std) : std::string("--")) + "\n";
  out.summary_path = (fs::path(opts.out_dir) / "summary.csv").string();
  write_text_file(out.summary_path, summary_csv);
  outputs.push_back(out.summary_path);

  for (int i = 0; i < n_ep; ++i) {
    const EpisodeResult& ep = results[static_cast<std::size_t>(i)];
    json j;
    j["episode"] = i;
    j["seed"] = ep_seeds[static_cast<std::size_t>(i)];
    j["env"] = opts.env_id;
    j["spec"] = spec_text;
    j["rho"] = ep.rho;
    if (ep.has_reward) {
      j["reward"] = ep.reward;
    } else {
      j["reward"] = nullptr;
    }
    j["done_early"] = ep.done_early;
    j["names"] = ep.trajectory.names;
    j["dt"] = ep.trajectory.dt;
    j["trajectory"] = ep.trajectory.samples;
    j["actions"] = ep.actions;
    const std::string path = (fs::path(opts.out_dir) / episode_json_name(i)).string();
    write_text_file(path, j.dump(2) + "\n");
    outputs.push_back(path);

    if (opts.emit_plot_data) {
      std::string log_csv = "step,generation,best_rho,median_rho,sigma\n";
      for (const PlanStepLog& e : ep.plan_log) {
        log_csv += std::to_string(e.step) + "," + std::to_string(e.generation) + "," +
                   fmt17(e.best_rho) + "," + fmt17(e.median_rho) + "," + fmt17(e.sigma) + "\n";
      }
      const std::string log_path = (fs::path(opts.out_dir) / plan_log_name(i)).string();
      write_text_file(log_path, log_csv);
      outputs.push_back(log_path);
    }
  }

  out.manifest_path = (fs::path(opts.out_dir) / "manifest.json").string();
  json inputs = {{"env", opts.env_id},
                 {"checkpoint", opts.checkpoint_path},
                 {"checkpoint_hash", file_hash_hex(opts.checkpoint_path)},
                 {"spec", spec_text},
                 {"horizon", mpc.horizon},
                 {"n_iter", mpc.n_iter},
                 {"n_samples", mpc.n_samples},
                 {"sigma0", mpc.sigma0},
                 {"action_repeat", mpc.action_repeat},
                 {"warm_start", mpc.warm_start},
                 {"episodes", n_ep},
                 {"max_steps", max_steps},
                 {"seed", opts.seed},
                 {"config", opts.config_path}};
  write_manifest(out.manifest_path, "run", inputs, outputs);
  return out;
}

// ---------------------------------------------------------------------------

CheckOutcome cmd_check_spec(const CheckOptions& opts) {
  if (opts.trace_path.empty()) fail(ErrorCode::invalid_argument, "check-spec: trace path required");
  if (opts.spec_text.empty() == opts.spec_path.empty()) {
    fail(ErrorCode::invalid_argument, "check-spec: exactly one of spec text / spec file required");
  }
  std::string text = opts.spec_text;
  if (!opts.spec_path.empty()) {
    std::ifstream f(opts.spec_path);
    if (!f) fail(ErrorCode::io, "cannot open spec file: " + opts.spec_path);
    std::stringstream buf;
    buf << f.rdbuf();
    text = buf.str();
  }
  const stl::FormulaPtr formula = stl::parse(text);
  const Trajectory traj = load_trace_csv(opts.trace_path);

  CheckOutcome out;
  out.canonical_spec = stl::to_string(*formula);
  out.rho = stl::robustness(*formula, traj, 0);
  out.sat = stl::satisfies(*formula, traj, 0);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct PaperRow {
  double rho_mean, rho_std, reward_mean, reward_std;
  bool has_reward;
};

PaperRow paper_row(const std::string& env_id) {
  if (env_id == "cartpole") return {0.069, 8e-3, 200.0, 0.0, true};
  if (env_id == "mountain_car") return {0.047, 1e-3, 89.06, 4.57, true};
  if (env_id == "fetch") return {0.067, 6e-3, 0, 0, false};
  if (env_id == "acc") return {7.679, 5.47, 0, 0, false};
  if (env_id == "parking") return {1.69e-2, 3.8e-3, 0, 0, false};
  fail(ErrorCode::unknown_name, "no published row for '" + env_id + "'");
}

std::string pm(double mean, double std) { return fmt4(mean) + " +/- " + fmt4(std); }

}  // namespace

BenchOutcome cmd_bench(const BenchOptions& opts) {
  if (opts.out_dir.empty()) fail(ErrorCode::invalid_argument, "bench: output directory required");
  if (opts.episodes < 1) fail(ErrorCode::invalid_argument, "bench: episodes must be >= 1");
  if (!(opts.scale > 0)) fail(ErrorCode::invalid_argument, "bench: scale must be > 0");
  fs::create_directories(opts.out_dir);

  const std::vector<std::string> suite =
      opts.env_ids.empty() ? std::vector<std::string>{"cartpole", "mountain_car", "fetch", "acc", "parking"}
                           : opts.env_ids;

  BenchOutcome out;
  std::vector<std::string> failures;

  for (const std::string& env_id : suite) {
    BenchRow row;
    row.env_id = env_id;
    const PaperRow paper = paper_row(env_id);
    row.paper_rho_mean = paper.rho_mean;
    row.paper_rho_std = paper.rho_std;
    row.paper_reward_mean = paper.reward_mean;
    row.paper_reward_std = paper.reward_std;
    row.paper_has_reward = paper.has_reward;

    if (env_id == "fetch") {
      row.skipped = true;
      row.note = "out of scope: requires an external articulated-arm physics engine";
      out.rows.push_back(row);
      continue;
    }

    try {
      const EnvSpecBundle bundle = default_bundle(env_id);
      const auto scaled = [&](int v, int floor_at) {
        return std::max(floor_at, static_cast<int>(std::lround(v * opts.scale)));
      };
      row.n_traj = scaled(bundle.n_traj, 1);
      row.n_iter = bundle.n_iter;
      row.n_samples = scaled(bundle.n_samples, 5);
      row.horizon = bundle.horizon;

      const fs::path env_dir = fs::path(opts.out_dir) / env_id;

      CollectOptions co;
      co.env_id = env_id;
      co.n_traj = row.n_traj;
      co.episode_len = bundle.collect_len > 0 ? bundle.collect_len : bundle.episode_len;
      co.seed = mix_seed(opts.seed, fnv1a64(env_id));
      co.out_path = (env_dir / "dataset.csv").string();
      const CollectOutcome c = cmd_collect(co);

      TrainOptions to;
      to.dataset_path = c.dataset_path;
      to.hidden = {64, 64};
      to.seed = co.seed;
      to.out_path = (env_dir / "model.json").string();
      const TrainOutcome t = cmd_train(to);

      RunOptions ro;
      ro.env_id = env_id;
      ro.checkpoint_path = t.checkpoint_path;
      ro.horizon = row.horizon;
      ro.n_iter = row.n_iter;
      ro.n_samples = row.n_samples;
      ro.episodes = opts.episodes;
      ro.seed = co.seed;
      ro.out_dir = (env_dir / "run").string();
      const RunOutcome r = cmd_run(ro);

      row.rho_mean = r.rho_mean;
      row.rho_std = r.rho_std;
      row.reward_mean = r.reward_mean;
      row.reward_std = r.reward_std;
      row.has_reward = r.has_reward;
    } catch (const Error& e) {
      row.skipped = true;
      row.note = std::string("failed: ") + e.what();
      failures.push_back(env_id + ": " + e.what());
    }
    out.rows.push_back(row);
  }

  std::string csv =
      "env,n_traj,n_iter,n_samples,horizon,rho_mean,rho_std,reward_mean,reward_std,"
      "paper_rho_mean,paper_rho_std,paper_reward_mean,paper_reward_std,note\n";
  for (const BenchRow& r : out.rows) {
    csv += r.env_id + ",";
    if (r.skipped) {
      csv += ",,,,,,,,";
    } else {
      csv += std::to_string(r.n_traj) + "," + std::to_string(r.n_iter) + "," +
             std::to_string(r.n_samples) + "," + std::to_string(r.horizon) + "," +
             fmt17(r.rho_mean) + "," + fmt17(r.rho_std) + "," +
             (r.has_reward ? fmt17(r.reward_mean) : std::string("--")) + "," +
             (r.has_reward ? fmt17(r.reward_std) : std::string("--")) + ",";
    }
    csv += fmt17(r.paper_rho_mean) + "," + fmt17(r.paper_rho_std) + "," +
           (r.paper_has_reward ? fmt17(r.paper_reward_mean) : std::string("--")) + "," +
           (r.paper_has_reward ? fmt17(r.paper_reward_std) : std::string("--")) + "," + r.note + "\n";
  }
  out.table_csv_path = (fs::path(opts.out_dir) / "bench_table.csv").string();
  write_text_file(out.table_csv_path, csv);

  std::string txt;
  char line[256];
  std::snprintf(line, sizeof(line), "%-14s %-28s %-24s %-22s %-16s\n", "Environment",
                "Robustness (mean +/- std)", "Reward (mean +/- std)", "Paper robustness",
                "Paper reward");
  txt += line;
  txt += std::string(106, '-') + "\n";
  for (const BenchRow& r : out.rows) {
    const std::string rho_col = r.skipped ? r.note : pm(r.rho_mean, r.rho_std);
    const std::string rew_col = r.skipped ? "--" : (r.has_reward ? pm(r.reward_mean, r.reward_std)
                                                                 : std::string("--"));
    const std::string paper_rew =
        r.paper_has_reward ? pm(r.paper_reward_mean, r.paper_reward_std) : std::string("--");
    std::snprintf(line, sizeof(line), "%-14s %-28s %-24s %-22s %-16s\n", r.env_id.c_str(),
                  rho_col.c_str(), rew_col.c_str(), pm(r.paper_rho_mean, r.paper_rho_std).c_str(),
                  paper_rew.c_str());
    txt += line;
  }
  out.table_txt_path = (fs::path(opts.out_dir) / "bench_table.txt").string();
  write_text_file(out.table_txt_path, txt);

  out.manifest_path = (fs::path(opts.out_dir) / "bench_manifest.json").string();
  json inputs = {{"episodes", opts.episodes}, {"seed", opts.seed}, {"scale", opts.scale},
                 {"suite", suite}};
  write_manifest(out.manifest_path, "bench", inputs, {out.table_csv_path, out.table_txt_path});

  if (!failures.empty()) {
    std::string msg = "bench: " + std::to_string(failures.size()) + " environment(s) failed:";
    for (const std::string& f : failures) msg += "\n  " + f;
    fail(ErrorCode::internal, msg);
  }
  return out;
}

}  // namespace stlmpc
