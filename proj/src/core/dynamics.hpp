#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core/trace.hpp"

namespace stlmpc {

struct Layer {
  Eigen::MatrixXd W;  // out x in
  Eigen::VectorXd b;  // out
  bool tanh_activation = true;
};

struct MlpParams {
  std::vector<Layer> layers;
};

struct TrainConfig {
  std::vector<int> hidden_sizes{256, 256};
  double learning_rate = 1e-3;
  double momentum = 0.9;
  int batch_size = 512;
  int epochs = 50;
  std::uint64_t seed = 0;
  double split_fraction = 0.9;
};

struct LossCurve {
  std::vector<double> train;  // running mean of mini-batch losses per epoch
  std::vector<double> val;    // full validation loss per epoch (NaN if no val split)
};

/// Predicts s' = s + denorm(net(norm([s; a]))); the network learns the state
/// delta in normalized space. Immutable once trained; forward/rollout are pure.
struct DynamicsModel {
  MlpParams params;
  NormStats in_stats;   // over [s; a]
  NormStats out_stats;  // over s' - s
  int state_dim = 0;
  int action_dim = 0;

  /// Raw network on already-normalized inputs, one sample per column.
  Eigen::MatrixXd net(const Eigen::MatrixXd& x_norm) const;

  Vec forward(const Vec& s, const Vec& a) const;

  /// One model step for many states at once (states/actions one per column).
  /// Returns next states, one per column.
  Eigen::MatrixXd step_batch(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions) const;

  Trajectory rollout(const Vec& s0, const std::vector<Vec>& actions,
                     const std::vector<std::string>& names = {}, double dt = 1.0) const;
};

double loss(const DynamicsModel& model, std::span<const Transition> batch);

/// Same layer shapes as the model's parameters.
MlpParams gradients(const DynamicsModel& model, std::span<const Transition> batch);

DynamicsModel train(const Dataset& dataset, const TrainConfig& cfg, LossCurve* curve = nullptr);

void save_checkpoint(const DynamicsModel& model, const TrainConfig& cfg, const std::string& path);
DynamicsModel load_checkpoint(const std::string& path, TrainConfig* cfg_out = nullptr);

}  // namespace stlmpc
