#include "stlmpc/stlmpc.h"

#include <cstring>
#include <memory>
#include <string>

#include "core/cmaes.hpp"
#include "core/dynamics.hpp"
#include "core/envs.hpp"
#include "core/pipeline.hpp"
#include "core/stl.hpp"

struct stlmpc_formula {
  stlmpc::stl::FormulaPtr f;
};
struct stlmpc_trace {
  stlmpc::Trajectory traj;
};
struct stlmpc_env {
  std::unique_ptr<stlmpc::Environment> env;
};
struct stlmpc_model {
  stlmpc::DynamicsModel model;
};
struct stlmpc_cmaes {
  stlmpc::CmaEs opt;
};

namespace {

thread_local std::string g_last_error;

stlmpc_status status_of(stlmpc::ErrorCode code) {
  using stlmpc::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return STLMPC_ERR_INVALID_ARGUMENT;
    case ErrorCode::parse: return STLMPC_ERR_PARSE;
    case ErrorCode::dimension: return STLMPC_ERR_DIMENSION;
    case ErrorCode::unknown_name: return STLMPC_ERR_UNKNOWN_NAME;
    case ErrorCode::io: return STLMPC_ERR_IO;
    case ErrorCode::numeric: return STLMPC_ERR_NUMERIC;
    case ErrorCode::internal: return STLMPC_ERR_INTERNAL;
  }
  return STLMPC_ERR_INTERNAL;
}

template <typename Fn>
stlmpc_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return STLMPC_OK;
  } catch (const stlmpc::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return STLMPC_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return STLMPC_ERR_INTERNAL;
  }
}

stlmpc_status bad_arg(const char* msg) {
  g_last_error = msg;
  return STLMPC_ERR_INVALID_ARGUMENT;
}

void copy_str(char* dst, size_t cap, const std::string& src) {
  if (cap == 0) return;
  const size_t n = src.size() < cap - 1 ? src.size() : cap - 1;
  std::memcpy(dst, src.data(), n);
  dst[n] = '\0';
}

std::string opt_str(const char* s) { return s ? std::string(s) : std::string(); }

}  // namespace

extern "C" {

const char* stlmpc_version(void) { return "0.1.0"; }

const char* stlmpc_last_error(void) { return g_last_error.c_str(); }

/* ------------------------------------------------------------------ */

stlmpc_status stlmpc_formula_parse(const char* text, stlmpc_formula** out) {
  if (!text || !out) return bad_arg("formula_parse: null argument");
  return guarded([&] { *out = new stlmpc_formula{stlmpc::stl::parse(text)}; });
}

void stlmpc_formula_free(stlmpc_formula* f) { delete f; }

stlmpc_status stlmpc_formula_to_string(const stlmpc_formula* f, char* buf, size_t buflen,
                                       size_t* needed) {
  if (!f) return bad_arg("formula_to_string: null formula");
  return guarded([&] {
    const std::string s = stlmpc::stl::to_string(*f->f);
    if (needed) *needed = s.size() + 1;
    if (buf && buflen > 0) copy_str(buf, buflen, s);
  });
}

/* ------------------------------------------------------------------ */

stlmpc_status stlmpc_trace_create(const char* const* names, size_t dim, stlmpc_trace** out) {
  if (!names || !out || dim == 0) return bad_arg("trace_create: null/empty arguments");
  return guarded([&] {
    auto* t = new stlmpc_trace;
    t->traj.names.assign(names, names + dim);
    *out = t;
  });
}

stlmpc_status stlmpc_trace_append(stlmpc_trace* trace, const double* sample, size_t dim) {
  if (!trace || !sample) return bad_arg("trace_append: null argument");
  return guarded([&] {
    if (dim != trace->traj.names.size()) {
      stlmpc::fail(stlmpc::ErrorCode::dimension, "trace_append: sample dim does not match trace");
    }
    trace->traj.samples.emplace_back(sample, sample + dim);
  });
}

stlmpc_status stlmpc_trace_load_csv(const char* path, stlmpc_trace** out) {
  if (!path || !out) return bad_arg("trace_load_csv: null argument");
  return guarded([&] { *out = new stlmpc_trace{stlmpc::load_trace_csv(path)}; });
}

size_t stlmpc_trace_length(const stlmpc_trace* trace) { return trace ? trace->traj.length() : 0; }

size_t stlmpc_trace_dim(const stlmpc_trace* trace) { return trace ? trace->traj.dim() : 0; }

void stlmpc_trace_free(stlmpc_trace* trace) { delete trace; }

stlmpc_status stlmpc_robustness(const stlmpc_formula* f, const stlmpc_trace* trace, size_t t,
                                double* rho_out) {
  if (!f || !trace || !rho_out) return bad_arg("robustness: null argument");
  return guarded([&] { *rho_out = stlmpc::stl::robustness(*f->f, trace->traj, t); });
}

stlmpc_status stlmpc_satisfies(const stlmpc_formula* f, const stlmpc_trace* trace, size_t t,
                               int* sat_out) {
  if (!f || !trace || !sat_out) return bad_arg("satisfies: null argument");
  return guarded([&] { *sat_out = stlmpc::stl::satisfies(*f->f, trace->traj, t) ? 1 : 0; });
}

/* ------------------------------------------------------------------ */

stlmpc_status stlmpc_env_create(const char* env_id, stlmpc_env** out) {
  if (!env_id || !out) return bad_arg("env_create: null argument");
  return guarded([&] { *out = new stlmpc_env{stlmpc::make_env(env_id)}; });
}

int stlmpc_env_state_dim(const stlmpc_env* env) { return env ? env->env->state_dim() : 0; }

int stlmpc_env_action_dim(const stlmpc_env* env) { return env ? env->env->action_dim() : 0; }

stlmpc_status stlmpc_env_reset(stlmpc_env* env, uint64_t seed, double* state_out) {
  if (!env || !state_out) return bad_arg("env_reset: null argument");
  return guarded([&] {
    const stlmpc::Vec s = env->env->reset(seed);
    std::memcpy(state_out, s.data(), s.size() * sizeof(double));
  });
}

stlmpc_status stlmpc_env_step(stlmpc_env* env, const double* state, const double* action,
                              double* next_state_out, double* reward_out, int* has_reward_out,
                              int* done_out) {
  if (!env || !state || !action || !next_state_out) return bad_arg("env_step: null argument");
  return guarded([&] {
    const auto sd = static_cast<size_t>(env->env->state_dim());
    const auto ad = static_cast<size_t>(env->env->action_dim());
    const stlmpc::StepResult r =
        env->env->step(stlmpc::Vec(state, state + sd), stlmpc::Vec(action, action + ad));
    std::memcpy(next_state_out, r.next_state.data(), sd * sizeof(double));
    if (reward_out) *reward_out = r.reward;
    if (has_reward_out) *has_reward_out = r.has_reward ? 1 : 0;
    if (done_out) *done_out = r.done ? 1 : 0;
  });
}

void stlmpc_env_free(stlmpc_env* env) { delete env; }

/* ------------------------------------------------------------------ */

stlmpc_status stlmpc_model_load(const char* checkpoint_path, stlmpc_model** out) {
  if (!checkpoint_path || !out) return bad_arg("model_load: null argument");
  return guarded([&] { *out = new stlmpc_model{stlmpc::load_checkpoint(checkpoint_path)}; });
}

int stlmpc_model_state_dim(const stlmpc_model* model) { return model ? model->model.state_dim : 0; }

int stlmpc_model_action_dim(const stlmpc_model* model) {
  return model ? model->model.action_dim : 0;
}

stlmpc_status stlmpc_model_forward(const stlmpc_model* model, const double* state,
                                   const double* action, double* next_state_out) {
  if (!model || !state || !action || !next_state_out) return bad_arg("model_forward: null argument");
  return guarded([&] {
    const auto sd = static_cast<size_t>(model->model.state_dim);
    const auto ad = static_cast<size_t>(model->model.action_dim);
    const stlmpc::Vec next =
        model->model.forward(stlmpc::Vec(state, state + sd), stlmpc::Vec(action, action + ad));
    std::memcpy(next_state_out, next.data(), sd * sizeof(double));
  });
}

void stlmpc_model_free(stlmpc_model* model) { delete model; }

/* ------------------------------------------------------------------ */

stlmpc_status stlmpc_cmaes_create(int dim, const double* mean0, double sigma0, int lambda,
                                  uint64_t seed, stlmpc_cmaes** out) {
  if (!mean0 || !out) return bad_arg("cmaes_create: null argument");
  return guarded([&] {
    *out = new stlmpc_cmaes{
        stlmpc::CmaEs(dim, stlmpc::Vec(mean0, mean0 + (dim > 0 ? dim : 0)), sigma0, lambda, seed)};
  });
}

int stlmpc_cmaes_lambda(const stlmpc_cmaes* opt) { return opt ? opt->opt.lambda : 0; }

stlmpc_status stlmpc_cmaes_ask(stlmpc_cmaes* opt, double* candidates_out) {
  if (!opt || !candidates_out) return bad_arg("cmaes_ask: null argument");
  return guarded([&] {
    const auto xs = opt->opt.ask();
    const auto dim = static_cast<size_t>(opt->opt.n);
    for (size_t k = 0; k < xs.size(); ++k) {
      std::memcpy(candidates_out + k * dim, xs[k].data(), dim * sizeof(double));
    }
  });
}

stlmpc_status stlmpc_cmaes_tell(stlmpc_cmaes* opt, const double* candidates,
                                const double* fitnesses) {
  if (!opt || !candidates || !fitnesses) return bad_arg("cmaes_tell: null argument");
  return guarded([&] {
    const auto lambda = static_cast<size_t>(opt->opt.lambda);
    const auto dim = static_cast<size_t>(opt->opt.n);
    std::vector<stlmpc::Vec> xs(lambda);
    for (size_t k = 0; k < lambda; ++k) {
      xs[k].assign(candidates + k * dim, candidates + (k + 1) * dim);
    }
    opt->opt.tell(xs, stlmpc::Vec(fitnesses, fitnesses + lambda));
  });
}

stlmpc_status stlmpc_cmaes_best(const stlmpc_cmaes* opt, double* x_out, double* f_out) {
  if (!opt) return bad_arg("cmaes_best: null optimizer");
  return guarded([&] {
    const stlmpc::Vec& x = opt->opt.best_point();
    if (x_out) std::memcpy(x_out, x.data(), x.size() * sizeof(double));
    if (f_out) *f_out = opt->opt.best_fitness();
  });
}

void stlmpc_cmaes_free(stlmpc_cmaes* opt) { delete opt; }

/* ------------------------------------------------------------------ */

stlmpc_status stlmpc_collect(const stlmpc_collect_options* opts, stlmpc_collect_result* result) {
  if (!opts || !result) return bad_arg("collect: null argument");
  return guarded([&] {
    stlmpc::CollectOptions o;
    o.env_id = opt_str(opts->env_id);
    o.config_path = opt_str(opts->config_path);
    o.n_traj = opts->n_traj;
    o.episode_len = opts->episode_len;
    o.seed = opts->seed;
    o.out_path = opt_str(opts->out_path);
    const stlmpc::CollectOutcome r = stlmpc::cmd_collect(o);
    copy_str(result->dataset_path, sizeof(result->dataset_path), r.dataset_path);
    copy_str(result->manifest_path, sizeof(result->manifest_path), r.manifest_path);
    result->n_transitions = r.n_transitions;
  });
}

stlmpc_status stlmpc_train(const stlmpc_train_options* opts, stlmpc_train_result* result) {
  if (!opts || !result) return bad_arg("train: null argument");
  return guarded([&] {
    stlmpc::TrainOptions o;
    o.dataset_path = opt_str(opts->dataset_path);
    o.config_path = opt_str(opts->config_path);
    if (opts->hidden && opts->n_hidden > 0) {
      o.hidden.assign(opts->hidden, opts->hidden + opts->n_hidden);
    }
    o.learning_rate = opts->learning_rate;
    o.momentum = opts->momentum;
    o.batch_size = opts->batch_size;
    o.epochs = opts->epochs;
    o.split_fraction = opts->split_fraction;
    o.seed = opts->seed;
    o.out_path = opt_str(opts->out_path);
    const stlmpc::TrainOutcome r = stlmpc::cmd_train(o);
    copy_str(result->checkpoint_path, sizeof(result->checkpoint_path), r.checkpoint_path);
    copy_str(result->loss_curve_path, sizeof(result->loss_curve_path), r.loss_curve_path);
    copy_str(result->manifest_path, sizeof(result->manifest_path), r.manifest_path);
    result->final_train_loss = r.final_train_loss;
    result->final_val_loss = r.final_val_loss;
    result->epochs = r.epochs;
  });
}

stlmpc_status stlmpc_run(const stlmpc_run_options* opts, stlmpc_run_result* result) {
  if (!opts || !result) return bad_arg("run: null argument");
  return guarded([&] {
    stlmpc::RunOptions o;
    o.env_id = opt_str(opts->env_id);
    o.checkpoint_path = opt_str(opts->checkpoint_path);
    o.spec_text = opt_str(opts->spec_text);
    o.config_path = opt_str(opts->config_path);
    o.horizon = opts->horizon;
    o.n_iter = opts->n_iter;
    o.n_samples = opts->n_samples;
    o.sigma0 = opts->sigma0;
    o.action_repeat = opts->action_repeat;
    o.cold_start = opts->cold_start != 0;
    o.episodes = opts->episodes;
    o.max_steps = opts->max_steps;
    o.seed = opts->seed;
    o.out_dir = opt_str(opts->out_dir);
    o.emit_plot_data = opts->emit_plot_data != 0;
    const stlmpc::RunOutcome r = stlmpc::cmd_run(o);
    result->rho_mean = r.rho_mean;
    result->rho_std = r.rho_std;
    result->reward_mean = r.reward_mean;
    result->reward_std = r.reward_std;
    result->has_reward = r.has_reward ? 1 : 0;
    result->episodes = static_cast<int>(r.episodes.size());
    copy_str(result->out_dir, sizeof(result->out_dir), r.out_dir);
    copy_str(result->summary_path, sizeof(result->summary_path), r.summary_path);
    copy_str(result->manifest_path, sizeof(result->manifest_path), r.manifest_path);
  });
}

stlmpc_status stlmpc_check_spec(const stlmpc_check_options* opts, stlmpc_check_result* result) {
  if (!opts || !result) return bad_arg("check_spec: null argument");
  return guarded([&] {
    stlmpc::CheckOptions o;
    o.spec_text = opt_str(opts->spec_text);
    o.spec_path = opt_str(opts->spec_path);
    o.trace_path = opt_str(opts->trace_path);
    const stlmpc::CheckOutcome r = stlmpc::cmd_check_spec(o);
    result->rho = r.rho;
    result->sat = r.sat ? 1 : 0;
    copy_str(result->canonical_spec, sizeof(result->canonical_spec), r.canonical_spec);
  });
}

stlmpc_status stlmpc_bench(const stlmpc_bench_options* opts, stlmpc_bench_result* result) {
  if (!opts || !result) return bad_arg("bench: null argument");
  return guarded([&] {
    stlmpc::BenchOptions o;
    o.out_dir = opt_str(opts->out_dir);
    o.seed = opts->seed;
    o.episodes = opts->episodes > 0 ? opts->episodes : 30;
    o.scale = opts->scale > 0 ? opts->scale : 1.0;
    if (opts->env_ids) {
      for (size_t i = 0; i < opts->n_env_ids; ++i) o.env_ids.emplace_back(opts->env_ids[i]);
    }
    const stlmpc::BenchOutcome r = stlmpc::cmd_bench(o);
    copy_str(result->table_csv_path, sizeof(result->table_csv_path), r.table_csv_path);
    copy_str(result->table_txt_path, sizeof(result->table_txt_path), r.table_txt_path);
    copy_str(result->manifest_path, sizeof(result->manifest_path), r.manifest_path);
  });
}

}  // extern "C"
