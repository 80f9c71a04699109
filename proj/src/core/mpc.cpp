#include "core/mpc.hpp"

#include <algorithm>
#include <cmath>

#include "core/cmaes.hpp"

namespace stlmpc {

std::vector<std::vector<Vec>> ModelPredictor::rollout_batch(
    const Vec& s0, const std::vector<std::vector<Vec>>& action_seqs) const {
  const auto K = static_cast<Eigen::Index>(action_seqs.size());
  if (K == 0) return {};
  const std::size_t H = action_seqs[0].size();
  const int sd = model_->state_dim;
  const int ad = model_->action_dim;

  std::vector<std::vector<Vec>> out(static_cast<std::size_t>(K));
  Eigen::MatrixXd S(sd, K), A(ad, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    if (action_seqs[static_cast<std::size_t>(k)].size() != H) {
      fail(ErrorCode::dimension, "rollout_batch: ragged action sequences");
    }
    S.col(k) = Eigen::Map<const Eigen::VectorXd>(s0.data(), sd);
    out[static_cast<std::size_t>(k)].reserve(H + 1);
    out[static_cast<std::size_t>(k)].push_back(s0);
  }
  for (std::size_t t = 0; t < H; ++t) {
    for (Eigen::Index k = 0; k < K; ++k) {
      const Vec& a = action_seqs[static_cast<std::size_t>(k)][t];
      if (static_cast<int>(a.size()) != ad) fail(ErrorCode::dimension, "rollout_batch: action dim");
      A.col(k) = Eigen::Map<const Eigen::VectorXd>(a.data(), ad);
    }
    S = model_->step_batch(S, A);
    for (Eigen::Index k = 0; k < K; ++k) {
      out[static_cast<std::size_t>(k)].emplace_back(S.col(k).data(), S.col(k).data() + sd);
    }
  }
  return out;
}

namespace {

struct BoxCodec {
  Vec center, half;

  explicit BoxCodec(const MpcConfig& cfg) {
    const std::size_t m = cfg.action_low.size();
    if (m == 0 || cfg.action_high.size() != m) {
      fail(ErrorCode::invalid_argument, "plan: action bounds missing or mismatched");
    }
    center.resize(m);
    half.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      if (!(cfg.action_low[i] <= cfg.action_high[i])) {
        fail(ErrorCode::invalid_argument, "plan: action_low above action_high");
      }
      center[i] = 0.5 * (cfg.action_low[i] + cfg.action_high[i]);
      half[i] = 0.5 * (cfg.action_high[i] - cfg.action_low[i]);
    }
  }

  // flattened normalized candidate -> H clipped action vectors
  std::vector<Vec> decode(const Vec& x, int horizon, const MpcConfig& cfg) const {
    const std::size_t m = half.size();
    std::vector<Vec> seq(static_cast<std::size_t>(horizon), Vec(m));
    for (int t = 0; t < horizon; ++t) {
      for (std::size_t i = 0; i < m; ++i) {
        const double a = center[i] + x[static_cast<std::size_t>(t) * m + i] * half[i];
        seq[static_cast<std::size_t>(t)][i] = std::clamp(a, cfg.action_low[i], cfg.action_high[i]);
      }
    }
    return seq;
  }

  Vec encode(const std::vector<Vec>& seq) const {
    const std::size_t m = half.size();
    Vec x(seq.size() * m);
    for (std::size_t t = 0; t < seq.size(); ++t) {
      for (std::size_t i = 0; i < m; ++i) {
        x[t * m + i] = half[i] > 0 ? (seq[t][i] - center[i]) / half[i] : 0.0;
      }
    }
    return x;
  }
};

}  // namespace

PlanResult plan(const Predictor& model, const stl::BoundFormula& phi, const Vec& s0,
                const MpcConfig& cfg, const std::vector<Vec>* prev_solution) {
  auto score = [&](const std::vector<Vec>& traj) {
    for (const Vec& s : traj) {
      if (!all_finite(s)) return -stl::kRobustnessCap;
    }
    return phi.robustness(traj, 1);
  };
  if (cfg.horizon < 1 || cfg.n_iter < 1) {
    fail(ErrorCode::invalid_argument, "plan: horizon and n_iter must be >= 1");
  }
  if (cfg.action_repeat < 1) {
    fail(ErrorCode::invalid_argument, "plan: action_repeat must be >= 1");
  }
  if (static_cast<int>(s0.size()) != model.state_dim()) {
    fail(ErrorCode::dimension, "plan: initial state dim does not match model");
  }
  const BoxCodec codec(cfg);
  const std::size_t m = codec.half.size();
  if (static_cast<int>(m) != model.action_dim()) {
    fail(ErrorCode::dimension, "plan: action bounds dim does not match model");
  }
  const int dim = cfg.horizon * static_cast<int>(m);

  Vec mean0(static_cast<std::size_t>(dim), 0.0);
  if (prev_solution) {
    if (static_cast<int>(prev_solution->size()) != cfg.horizon) {
      fail(ErrorCode::dimension, "plan: prev_solution length does not match horizon");
    }
    mean0 = codec.encode(*prev_solution);
  }

  CmaEs opt(dim, mean0, cfg.sigma0, cfg.n_samples, cfg.seed);

  PlanResult result;
  std::vector<std::vector<Vec>> decoded(static_cast<std::size_t>(opt.lambda));
  Vec fitness(static_cast<std::size_t>(opt.lambda));
  std::vector<std::vector<Vec>> held;
  auto expand =
      [&](const std::vector<std::vector<Vec>>& seqs) -> const std::vector<std::vector<Vec>>& {
    if (cfg.action_repeat == 1) return seqs;
    held.assign(seqs.size(), {});
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      held[i].reserve(seqs[i].size() * static_cast<std::size_t>(cfg.action_repeat));
      for (const Vec& a : seqs[i]) {
        held[i].insert(held[i].end(), static_cast<std::size_t>(cfg.action_repeat), a);
      }
    }
    return held;
  };

  for (int gen = 0; gen < cfg.n_iter; ++gen) {
    const std::vector<Vec> xs = opt.ask();
    for (std::size_t k = 0; k < xs.size(); ++k) decoded[k] = codec.decode(xs[k], cfg.horizon, cfg);
    const auto trajs = model.rollout_batch(s0, expand(decoded));
    for (std::size_t k = 0; k < trajs.size(); ++k) fitness[k] = score(trajs[k]);
    opt.tell(xs, fitness);

    Vec sorted = fitness;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    result.log.push_back({0, gen + 1, opt.best_fitness(), sorted[sorted.size() / 2], opt.sigma});
  }

  // Execute the optimizer's solution estimate, not the best raw sample: under
  // a flat or nearly flat objective (common when the current state attains the
  // window minimum of a G spec) the best sample is noise while the mean stays
  // on the warm-started plan. The sample wins only when strictly better.
  Vec mean_x(opt.mean.data(), opt.mean.data() + opt.mean.size());
  std::vector<Vec> mean_actions = codec.decode(mean_x, cfg.horizon, cfg);
  const auto mean_traj = model.rollout_batch(s0, expand({mean_actions}));
  const double mean_rho = score(mean_traj[0]);

  if (mean_rho >= opt.best_fitness()) {
    result.actions = std::move(mean_actions);
    result.predicted_rho = mean_rho;
  } else {
    result.actions = codec.decode(opt.best_point(), cfg.horizon, cfg);
    result.predicted_rho = opt.best_fitness();
  }
  return result;
}

EpisodeResult run_episode(Environment& env, const Predictor& model, const stl::Formula& phi,
                          const MpcConfig& cfg, int max_steps, std::uint64_t seed) {
  if (max_steps < 0) fail(ErrorCode::invalid_argument, "run_episode: max_steps must be >= 0");
  const stl::BoundFormula bound(phi, env.names());

  EpisodeResult ep;
  ep.trajectory.names = env.names();
  ep.trajectory.dt = env.dt();

  Vec s = env.reset(seed);
  ep.trajectory.samples.push_back(s);

  std::vector<Vec> prev;
  for (int t = 0; t < max_steps; ++t) {
    MpcConfig step_cfg = cfg;
    step_cfg.seed = mix_seed(seed, 1000 + static_cast<std::uint64_t>(t));
    const std::vector<Vec>* warm = nullptr;
    if (cfg.warm_start && !prev.empty()) {
      if (prev.size() >= 2 && t % std::max(1, cfg.action_repeat) == 0) {
        std::rotate(prev.begin(), prev.begin() + 1, prev.end());
        prev.back() = prev[prev.size() - 2];
      }
      warm = &prev;
    }
    PlanResult pr = plan(model, bound, s, step_cfg, warm);
    for (PlanStepLog& entry : pr.log) {
      entry.step = t;
      ep.plan_log.push_back(entry);
    }
    prev = pr.actions;

    const Vec& a = pr.actions.front();
    StepResult r;
    try {
      r = env.step(s, a);
    } catch (const Error&) {
      ep.aborted = true;
      break;
    }
    ep.actions.push_back(a);
    ep.trajectory.samples.push_back(r.next_state);
    if (r.has_reward) {
      ep.has_reward = true;
      ep.reward += r.reward;
    }
    s = std::move(r.next_state);
    if (r.done) {
      ep.done_early = true;
      break;
    }
  }

  ep.rho = bound.robustness(ep.trajectory.samples, 0);
  return ep;
}

}  // namespace stlmpc
