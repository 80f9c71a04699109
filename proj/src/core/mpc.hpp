#pragma once

#include <cstdint>
#include <vector>

#include "core/dynamics.hpp"
#include "core/envs.hpp"
#include "core/stl.hpp"

namespace stlmpc {

/// Rollout backend the planner scores candidates against. Implementations
/// must be pure: identical inputs give identical trajectories.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;

  /// K action sequences of equal length H from s0 -> K predicted
  /// trajectories of H+1 samples each, the first being s0.
  virtual std::vector<std::vector<Vec>> rollout_batch(
      const Vec& s0, const std::vector<std::vector<Vec>>& action_seqs) const = 0;
};

class ModelPredictor final : public Predictor {
 public:
  explicit ModelPredictor(const DynamicsModel& model) : model_(&model) {}
  int state_dim() const override { return model_->state_dim; }
  int action_dim() const override { return model_->action_dim; }
  std::vector<std::vector<Vec>> rollout_batch(
      const Vec& s0, const std::vector<std::vector<Vec>>& action_seqs) const override;

 private:
  const DynamicsModel* model_;
};

struct MpcConfig {
  int horizon = 10;
  int n_iter = 5;
  int n_samples = 0;    // population size; 0 picks the CMA-ES default
  double sigma0 = 0.5;  // in normalized action units (box mapped to [-1, 1])
  int action_repeat = 1;  // model steps each planned action is held for (move blocking)
  bool warm_start = true;
  Vec action_low, action_high;
  std::uint64_t seed = 0;
};

struct PlanStepLog {
  int step = 0;
  int generation = 0;
  double best_rho = 0;    // incumbent best predicted robustness so far
  double median_rho = 0;  // median fitness of the generation
  double sigma = 0;
};

struct PlanResult {
  std::vector<Vec> actions;  // horizon actions, clipped to bounds
  double predicted_rho = 0;
  std::vector<PlanStepLog> log;  // one entry per generation
};

/// One receding-horizon planning step: n_iter CMA-ES generations over
/// flattened H-step action sequences, fitness = robustness of the predicted
/// trajectory from its first predicted sample (the current state is already
/// fixed, so it is excluded from the scored window). Each planned action is
/// held for action_repeat consecutive model steps, so the scored window spans
/// horizon * action_repeat predictions while the search stays horizon
/// decisions wide. Candidates live in a normalized space where the action box
/// maps to [-1, 1]; decoding clips to the bounds. Non-finite rollouts score
/// -cap. prev_solution (if given) seeds the search mean.
/// Returns the final distribution mean unless the best sampled candidate
/// predicts strictly higher robustness (the mean is the stabler estimate and
/// inherits the warm start when the objective is flat).
PlanResult plan(const Predictor& model, const stl::BoundFormula& phi, const Vec& s0,
                const MpcConfig& cfg, const std::vector<Vec>* prev_solution = nullptr);

struct EpisodeResult {
  Trajectory trajectory;  // executed states, env dimension names
  std::vector<Vec> actions;
  double rho = 0;  // robustness of the executed trajectory at t = 0
  double reward = 0;
  bool has_reward = false;
  bool done_early = false;
  bool aborted = false;
  std::vector<PlanStepLog> plan_log;
};

/// Reset, then repeatedly plan and execute only the first action. Warm start
/// reuses the previous solution as the next search mean, shifted left one
/// slot (last repeated) whenever a full action_repeat block has been
/// executed; cold start re-centers every step.
EpisodeResult run_episode(Environment& env, const Predictor& model, const stl::Formula& phi,
                          const MpcConfig& cfg, int max_steps, std::uint64_t seed);

}  // namespace stlmpc
