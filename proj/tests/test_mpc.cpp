#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "core/mpc.hpp"

using namespace stlmpc;

namespace {

DynamicsModel zero_model(int state_dim, int action_dim) {
  DynamicsModel m;
  m.state_dim = state_dim;
  m.action_dim = action_dim;
  Layer l1, l2;
  l1.W = Eigen::MatrixXd::Zero(8, state_dim + action_dim);
  l1.b = Eigen::VectorXd::Zero(8);
  l2.W = Eigen::MatrixXd::Zero(state_dim, 8);
  l2.b = Eigen::VectorXd::Zero(state_dim);
  l2.tanh_activation = false;
  m.params.layers = {l1, l2};
  m.in_stats.mean.assign(state_dim + action_dim, 0.0);
  m.in_stats.std.assign(state_dim + action_dim, 1.0);
  m.out_stats.mean.assign(state_dim, 0.0);
  m.out_stats.std.assign(state_dim, 1.0);
  return m;
}

// Exact 1-D system s' = 0.9 s + 0.1 a used as a ground-truth planner backend.
class LinearPredictor final : public Predictor {
 public:
  int state_dim() const override { return 1; }
  int action_dim() const override { return 1; }
  std::vector<std::vector<Vec>> rollout_batch(
      const Vec& s0, const std::vector<std::vector<Vec>>& action_seqs) const override {
    std::vector<std::vector<Vec>> out;
    for (const auto& seq : action_seqs) {
      std::vector<Vec> traj{s0};
      double s = s0[0];
      for (const auto& a : seq) {
        s = 0.9 * s + 0.1 * a[0];
        traj.push_back({s});
      }
      out.push_back(std::move(traj));
    }
    return out;
  }
};

// Wraps LinearPredictor and records every action sequence it is asked to
// roll out.
class RecordingPredictor final : public Predictor {
 public:
  int state_dim() const override { return 1; }
  int action_dim() const override { return 1; }
  std::vector<std::vector<Vec>> rollout_batch(
      const Vec& s0, const std::vector<std::vector<Vec>>& action_seqs) const override {
    for (const auto& seq : action_seqs) seen.push_back(seq);
    return inner.rollout_batch(s0, action_seqs);
  }
  LinearPredictor inner;
  mutable std::vector<std::vector<Vec>> seen;
};

class NanPredictor final : public Predictor {
 public:
  int state_dim() const override { return 1; }
  int action_dim() const override { return 1; }
  std::vector<std::vector<Vec>> rollout_batch(
      const Vec& s0, const std::vector<std::vector<Vec>>& action_seqs) const override {
    std::vector<std::vector<Vec>> out;
    for (const auto& seq : action_seqs) {
      std::vector<Vec> traj{s0};
      for (std::size_t i = 0; i < seq.size(); ++i)
        traj.push_back({std::numeric_limits<double>::quiet_NaN()});
      out.push_back(std::move(traj));
    }
    return out;
  }
};

// Plans against the real simulator instead of a learned model; cartpole's
// step function is deterministic so this is a pure rollout.
class EnvPredictor final : public Predictor {
 public:
  explicit EnvPredictor(const std::string& id) : env_(make_env(id)) {}
  int state_dim() const override { return env_->state_dim(); }
  int action_dim() const override { return env_->action_dim(); }
  std::vector<std::vector<Vec>> rollout_batch(
      const Vec& s0, const std::vector<std::vector<Vec>>& action_seqs) const override {
    std::vector<std::vector<Vec>> out;
    for (const auto& seq : action_seqs) {
      std::vector<Vec> traj{s0};
      Vec s = s0;
      for (const auto& a : seq) {
        s = env_->step(s, a).next_state;
        traj.push_back(s);
      }
      out.push_back(std::move(traj));
    }
    return out;
  }

 private:
  mutable std::unique_ptr<Environment> env_;
};

DynamicsModel quick_cartpole_model(int n_traj, int epochs, std::uint64_t seed) {
  auto env = make_env("cartpole");
  Dataset ds = collect(*env, n_traj, 40, seed);
  TrainConfig cfg;
  cfg.hidden_sizes = {24, 24};
  cfg.learning_rate = 3e-3;
  cfg.epochs = epochs;
  cfg.batch_size = 256;
  cfg.seed = seed;
  return train(ds, cfg);
}

}  // namespace

TEST_CASE("constant objective still yields a valid in-bounds plan") {
  DynamicsModel m = zero_model(1, 1);
  ModelPredictor pred(m);
  stl::BoundFormula phi(*stl::parse("G (x >= 0.1)"), {"x"});
  MpcConfig cfg;
  cfg.horizon = 4;
  cfg.n_iter = 3;
  cfg.n_samples = 8;
  cfg.action_low = {-2.0};
  cfg.action_high = {2.0};
  cfg.seed = 5;
  PlanResult res = plan(pred, phi, {0.3}, cfg);
  REQUIRE(res.actions.size() == 4);
  for (const auto& a : res.actions) {
    REQUIRE(a.size() == 1);
    CHECK(a[0] >= -2.0);
    CHECK(a[0] <= 2.0);
  }
  CHECK(res.predicted_rho == doctest::Approx(0.2).epsilon(1e-12));
  REQUIRE(res.log.size() == 3);
  for (const auto& entry : res.log) {
    CHECK(entry.best_rho == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(entry.median_rho == doctest::Approx(0.2).epsilon(1e-12));
  }
}

TEST_CASE("planner reaches the target on the exact linear system") {
  LinearPredictor pred;
  stl::BoundFormula phi(*stl::parse("F (x > 0.4)"), {"x"});
  MpcConfig cfg;
  cfg.horizon = 10;
  cfg.n_iter = 80;
  cfg.n_samples = 20;
  cfg.action_low = {0.0};
  cfg.action_high = {1.0};
  cfg.seed = 7;
  PlanResult res = plan(pred, phi, {0.0}, cfg);
  CHECK(res.predicted_rho > 0.0);

  // all-ones is the maximizer of this piecewise-linear objective; enumerate
  // the {0,1}-vertex grid as an independent check
  double grid_best = -1e18;
  for (int mask = 0; mask < (1 << 10); ++mask) {
    double s = 0.0, best = -1e18;
    for (int t = 0; t < 10; ++t) {
      s = 0.9 * s + 0.1 * ((mask >> t) & 1);
      best = std::max(best, s - 0.4);
    }
    grid_best = std::max(grid_best, best);
  }
  CHECK(res.predicted_rho >= grid_best - 1e-3);

  double incumbent = -1e300;
  for (const auto& entry : res.log) {
    REQUIRE(entry.best_rho >= incumbent);
    incumbent = entry.best_rho;
  }
}

TEST_CASE("all-nan rollouts score the negative cap instead of crashing") {
  NanPredictor pred;
  stl::BoundFormula phi(*stl::parse("F (x > 0.4)"), {"x"});
  MpcConfig cfg;
  cfg.horizon = 3;
  cfg.n_iter = 2;
  cfg.n_samples = 6;
  cfg.action_low = {-1.0};
  cfg.action_high = {1.0};
  PlanResult res = plan(pred, phi, {0.0}, cfg);
  CHECK(res.predicted_rho == -stl::kRobustnessCap);
  REQUIRE(res.actions.size() == 3);
  for (const auto& a : res.actions) {
    CHECK(a[0] >= -1.0);
    CHECK(a[0] <= 1.0);
  }
}

TEST_CASE("plan validates its inputs") {
  DynamicsModel m = zero_model(2, 1);
  ModelPredictor pred(m);
  stl::BoundFormula phi(*stl::parse("G (x >= 0)"), {"x", "y"});
  MpcConfig cfg;
  cfg.horizon = 3;
  cfg.n_iter = 1;
  cfg.n_samples = 4;
  cfg.action_low = {-1.0};
  cfg.action_high = {1.0};
  CHECK_THROWS_AS(plan(pred, phi, {0.0}, cfg), Error);  // s0 dim
  MpcConfig bad = cfg;
  bad.horizon = 0;
  CHECK_THROWS_AS(plan(pred, phi, {0.0, 0.0}, bad), Error);
  bad = cfg;
  bad.n_iter = 0;
  CHECK_THROWS_AS(plan(pred, phi, {0.0, 0.0}, bad), Error);
  bad = cfg;
  bad.action_low = {-1.0, -1.0};
  CHECK_THROWS_AS(plan(pred, phi, {0.0, 0.0}, bad), Error);
  std::vector<Vec> wrong_prev = {{0.0}, {0.0}};  // horizon is 3
  CHECK_THROWS_AS(plan(pred, phi, {0.0, 0.0}, cfg, &wrong_prev), Error);
}

TEST_CASE("warm start accepts the previous solution as the new search mean") {
  LinearPredictor pred;
  stl::BoundFormula phi(*stl::parse("F (x > 0.4)"), {"x"});
  MpcConfig cfg;
  cfg.horizon = 5;
  cfg.n_iter = 4;
  cfg.n_samples = 10;
  cfg.action_low = {0.0};
  cfg.action_high = {1.0};
  cfg.seed = 3;
  std::vector<Vec> prev = {{1.0}, {1.0}, {1.0}, {1.0}, {1.0}};
  PlanResult res = plan(pred, phi, {0.0}, cfg, &prev);
  REQUIRE(res.actions.size() == 5);
  // seeding at the optimum vertex keeps the incumbent there
  double s = 0.0, best = -1e18;
  for (int t = 0; t < 5; ++t) {
    s = 0.9 * s + 0.1;
    best = std::max(best, s - 0.4);
  }
  CHECK(res.predicted_rho >= best - 1e-9);
}

TEST_CASE("held actions extend the predicted window without widening the search") {
  RecordingPredictor pred;
  stl::BoundFormula phi(*stl::parse("F (x > 0.4)"), {"x"});
  MpcConfig cfg;
  cfg.horizon = 2;
  cfg.n_iter = 30;
  cfg.n_samples = 12;
  cfg.action_repeat = 5;
  cfg.action_low = {0.0};
  cfg.action_high = {1.0};
  cfg.seed = 9;
  PlanResult res = plan(pred, phi, {0.0}, cfg);
  REQUIRE(res.actions.size() == 2);
  REQUIRE_FALSE(pred.seen.empty());
  for (const auto& seq : pred.seen) {
    REQUIRE(seq.size() == 10);
    for (std::size_t t = 0; t < seq.size(); ++t) {
      CHECK(seq[t][0] == seq[t - t % 5][0]);
    }
  }
  // x cannot pass 0.4 within two raw steps from 0, so a positive score
  // proves the rollout ran over the held ten-step window
  CHECK(res.predicted_rho > 0.0);

  MpcConfig bad = cfg;
  bad.action_repeat = 0;
  CHECK_THROWS_AS(plan(pred, phi, {0.0}, bad), Error);
}

TEST_CASE("episodes execute one action per step inside the bounds") {
  auto env = make_env("cartpole");
  DynamicsModel m = quick_cartpole_model(60, 10, 2);
  ModelPredictor pred(m);
  MpcConfig cfg;
  cfg.horizon = 5;
  cfg.n_iter = 2;
  cfg.n_samples = 12;
  cfg.action_low = env->action_low();
  cfg.action_high = env->action_high();
  EpisodeResult ep = run_episode(*env, pred, *stl::parse("G (abs(x) < 2.4)"), cfg, 20, 11);
  CHECK_FALSE(ep.aborted);
  CHECK(ep.trajectory.length() == ep.actions.size() + 1);
  CHECK(ep.trajectory.length() <= 21);
  for (const auto& a : ep.actions) {
    CHECK(a[0] >= -10.0);
    CHECK(a[0] <= 10.0);
  }
  CHECK(ep.has_reward);
  CHECK(std::isfinite(ep.rho));
  // one plan log block per executed step
  int max_step = -1;
  for (const auto& entry : ep.plan_log) max_step = std::max(max_step, entry.step);
  CHECK(max_step + 1 == static_cast<int>(ep.actions.size()));
}

TEST_CASE("degenerate zero-step episode evaluates the initial sample only") {
  auto env = make_env("cartpole");
  DynamicsModel m = zero_model(4, 1);
  ModelPredictor pred(m);
  MpcConfig cfg;
  cfg.horizon = 3;
  cfg.n_iter = 1;
  cfg.n_samples = 4;
  cfg.action_low = env->action_low();
  cfg.action_high = env->action_high();
  EpisodeResult ep = run_episode(*env, pred, *stl::parse("G (abs(x) < 0.1)"), cfg, 0, 4);
  CHECK(ep.trajectory.length() == 1);
  CHECK(ep.actions.empty());
  CHECK(ep.plan_log.empty());
  Vec s0 = env->reset(4);
  CHECK(ep.trajectory.samples[0] == s0);
  CHECK(ep.rho == doctest::Approx(0.1 - std::fabs(s0[1])).epsilon(1e-12));
}

TEST_CASE("episodes are bit-identical under the same seed") {
  DynamicsModel m = quick_cartpole_model(60, 10, 8);
  ModelPredictor pred(m);
  MpcConfig cfg;
  cfg.horizon = 4;
  cfg.n_iter = 2;
  cfg.n_samples = 10;
  auto env1 = make_env("cartpole");
  cfg.action_low = env1->action_low();
  cfg.action_high = env1->action_high();
  auto phi = stl::parse("G ((abs(x) < 0.1) & (abs(theta) < 0.2094))");

  EpisodeResult a = run_episode(*env1, pred, *phi, cfg, 15, 21);
  auto env2 = make_env("cartpole");
  EpisodeResult b = run_episode(*env2, pred, *phi, cfg, 15, 21);
  REQUIRE(a.trajectory.length() == b.trajectory.length());
  for (std::size_t t = 0; t < a.trajectory.length(); ++t)
    REQUIRE(a.trajectory.samples[t] == b.trajectory.samples[t]);
  for (std::size_t t = 0; t < a.actions.size(); ++t) REQUIRE(a.actions[t] == b.actions[t]);
  CHECK(a.rho == b.rho);
  CHECK(a.reward == b.reward);

  auto env3 = make_env("cartpole");
  EpisodeResult c = run_episode(*env3, pred, *phi, cfg, 15, 22);
  CHECK(a.trajectory.samples[0] != c.trajectory.samples[0]);
}

TEST_CASE("cold start changes the search but not the contract") {
  DynamicsModel m = quick_cartpole_model(60, 10, 9);
  ModelPredictor pred(m);
  auto env = make_env("cartpole");
  MpcConfig cfg;
  cfg.horizon = 4;
  cfg.n_iter = 2;
  cfg.n_samples = 10;
  cfg.action_low = env->action_low();
  cfg.action_high = env->action_high();
  cfg.warm_start = false;
  auto phi = stl::parse("G (abs(theta) < 0.2094)");
  EpisodeResult ep = run_episode(*env, pred, *phi, cfg, 15, 3);
  CHECK_FALSE(ep.aborted);
  CHECK(ep.trajectory.length() >= 2);
  for (const auto& a : ep.actions) {
    CHECK(a[0] >= -10.0);
    CHECK(a[0] <= 10.0);
  }
}

TEST_CASE("oracle-backed planning is no worse than the learned model") {
  DynamicsModel m = quick_cartpole_model(150, 25, 5);
  ModelPredictor learned(m);
  EnvPredictor oracle("cartpole");
  auto phi = stl::parse("G ((abs(x) < 0.1) & (abs(theta) < 0.2094))");

  MpcConfig cfg;
  {
    auto env = make_env("cartpole");
    cfg.action_low = env->action_low();
    cfg.action_high = env->action_high();
  }
  cfg.horizon = 6;
  cfg.n_iter = 3;
  cfg.n_samples = 24;

  double mean_oracle = 0.0, mean_learned = 0.0;
  const int runs = 10;
  for (int i = 0; i < runs; ++i) {
    std::uint64_t seed = 100 + i;
    auto env_a = make_env("cartpole");
    mean_oracle += run_episode(*env_a, oracle, *phi, cfg, 40, seed).rho;
    auto env_b = make_env("cartpole");
    mean_learned += run_episode(*env_b, learned, *phi, cfg, 40, seed).rho;
  }
  mean_oracle /= runs;
  mean_learned /= runs;
  CHECK(mean_oracle >= mean_learned - 0.02);
  CHECK(mean_oracle > 0.0);
}
