#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "core/trace.hpp"

namespace stlmpc {

struct StepResult {
  Vec next_state;
  double reward = 0.0;
  bool has_reward = false;
  bool done = false;
};

/// Simulator contract. step advances from an explicit state so callers own
/// the trajectory; seeded stochastic elements (initial state, ado policy)
/// live on an internal RNG stream set by reset.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const std::string& id() const = 0;
  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual const std::vector<std::string>& names() const = 0;
  virtual const Vec& action_low() const = 0;
  virtual const Vec& action_high() const = 0;
  virtual double dt() const = 0;

  virtual Vec reset(std::uint64_t seed) = 0;
  virtual StepResult step(const Vec& state, const Vec& action) = 0;
};

/// Known ids: cartpole, mountain_car, acc, parking. Numeric constants may be
/// overridden per environment (see each implementation's constant names).
std::unique_ptr<Environment> make_env(const std::string& id,
                                      const std::map<std::string, double>& overrides = {});

std::vector<std::string> env_ids();

/// Random-controller exploration: n_traj episodes of uniform actions over
/// the action box, every (s, a, s') transition kept, done truncates.
Dataset collect(Environment& env, int n_traj, int episode_len, std::uint64_t seed);

/// Per-environment benchmark defaults: spec text plus the published
/// hyperparameter row.
struct EnvSpecBundle {
  std::string env_id;
  std::string spec_text;
  int n_traj = 0;
  int episode_len = 0;
  int collect_len = 0;  // steps per exploration episode; 0: episode_len
  int horizon = 0;
  int n_iter = 0;
  int n_samples = 0;
  int action_repeat = 1;
  bool has_reward = false;
};

EnvSpecBundle default_bundle(const std::string& env_id);

}  // namespace stlmpc
