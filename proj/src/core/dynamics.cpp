#include "core/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

namespace stlmpc {

using json = nlohmann::json;

namespace {

Eigen::VectorXd to_eigen(const Vec& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

struct BatchMatrices {
  Eigen::MatrixXd x;  // normalized inputs, in_dim x B
  Eigen::MatrixXd d;  // normalized delta targets, out_dim x B
};

BatchMatrices assemble(const DynamicsModel& model, std::span<const Transition> batch) {
  const int in_dim = model.state_dim + model.action_dim;
  const auto B = static_cast<Eigen::Index>(batch.size());
  BatchMatrices m;
  m.x.resize(in_dim, B);
  m.d.resize(model.state_dim, B);
  for (Eigen::Index k = 0; k < B; ++k) {
    const Transition& tr = batch[static_cast<std::size_t>(k)];
    if (static_cast<int>(tr.state.size()) != model.state_dim ||
        static_cast<int>(tr.action.size()) != model.action_dim ||
        static_cast<int>(tr.next_state.size()) != model.state_dim) {
      fail(ErrorCode::dimension, "transition dims do not match model dims");
    }
    for (int i = 0; i < model.state_dim; ++i) {
      m.x(i, k) = (tr.state[static_cast<std::size_t>(i)] - model.in_stats.mean[static_cast<std::size_t>(i)]) /
                  model.in_stats.std[static_cast<std::size_t>(i)];
      m.d(i, k) = (tr.next_state[static_cast<std::size_t>(i)] - tr.state[static_cast<std::size_t>(i)] -
                   model.out_stats.mean[static_cast<std::size_t>(i)]) /
                  model.out_stats.std[static_cast<std::size_t>(i)];
    }
    for (int j = 0; j < model.action_dim; ++j) {
      const std::size_t d = static_cast<std::size_t>(model.state_dim + j);
      m.x(model.state_dim + j, k) = (tr.action[static_cast<std::size_t>(j)] - model.in_stats.mean[d]) /
                                    model.in_stats.std[d];
    }
  }
  return m;
}

// Forward pass keeping post-activation values for backprop.
std::vector<Eigen::MatrixXd> forward_store(const MlpParams& params, const Eigen::MatrixXd& x) {
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(params.layers.size() + 1);
  acts.push_back(x);
  for (const Layer& layer : params.layers) {
    Eigen::MatrixXd z = (layer.W * acts.back()).colwise() + layer.b;
    if (layer.tanh_activation) z = z.array().tanh();
    acts.push_back(std::move(z));
  }
  return acts;
}

double loss_from(const Eigen::MatrixXd& y, const Eigen::MatrixXd& d) {
  return (y - d).squaredNorm() / static_cast<double>(y.cols());
}

MlpParams backprop(const MlpParams& params, const std::vector<Eigen::MatrixXd>& acts,
                   const Eigen::MatrixXd& d) {
  const auto B = static_cast<double>(d.cols());
  const std::size_t L = params.layers.size();
  MlpParams grads;
  grads.layers.resize(L);

  Eigen::MatrixXd delta = 2.0 * (acts[L] - d) / B;
  for (std::size_t l = L; l-- > 0;) {
    if (params.layers[l].tanh_activation) {
      delta = delta.array() * (1.0 - acts[l + 1].array().square());
    }
    grads.layers[l].W = delta * acts[l].transpose();
    grads.layers[l].b = delta.rowwise().sum();
    grads.layers[l].tanh_activation = params.layers[l].tanh_activation;
    if (l > 0) delta = (params.layers[l].W.transpose() * delta).eval();
  }
  return grads;
}

MlpParams init_params(int in_dim, int out_dim, const std::vector<int>& hidden, std::uint64_t seed) {
  std::vector<int> dims;
  dims.push_back(in_dim);
  for (int h : hidden) {
    if (h < 1) fail(ErrorCode::invalid_argument, "hidden layer size must be >= 1");
    dims.push_back(h);
  }
  dims.push_back(out_dim);

  Rng rng = make_rng(mix_seed(seed, 1));
  MlpParams params;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Layer layer;
    const int rows = dims[l + 1];
    const int cols = dims[l];
    const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    layer.W.resize(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) layer.W(r, c) = dist(rng);
    }
    layer.b = Eigen::VectorXd::Zero(rows);
    layer.tanh_activation = (l + 2 < dims.size());
    params.layers.push_back(std::move(layer));
  }
  return params;
}

json layer_to_json(const Layer& layer) {
  json j;
  j["rows"] = layer.W.rows();
  j["cols"] = layer.W.cols();
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(layer.W.size()));
  for (Eigen::Index r = 0; r < layer.W.rows(); ++r) {
    for (Eigen::Index c = 0; c < layer.W.cols(); ++c) w.push_back(layer.W(r, c));
  }
  j["W"] = std::move(w);
  j["b"] = std::vector<double>(layer.b.data(), layer.b.data() + layer.b.size());
  j["activation"] = layer.tanh_activation ? "tanh" : "identity";
  return j;
}

Layer layer_from_json(const json& j) {
  Layer layer;
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto w = j.at("W").get<std::vector<double>>();
  const auto b = j.at("b").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(w.size()) != rows * cols ||
      static_cast<Eigen::Index>(b.size()) != rows) {
    fail(ErrorCode::parse, "checkpoint layer size mismatch");
  }
  layer.W.resize(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) layer.W(r, c) = w[k++];
  }
  layer.b = Eigen::Map<const Eigen::VectorXd>(b.data(), rows);
  const std::string act = j.at("activation").get<std::string>();
  if (act != "tanh" && act != "identity") fail(ErrorCode::parse, "unknown activation: " + act);
  layer.tanh_activation = (act == "tanh");
  return layer;
}

}  // namespace

Eigen::MatrixXd DynamicsModel::net(const Eigen::MatrixXd& x_norm) const {
  Eigen::MatrixXd h = x_norm;
  for (const Layer& layer : params.layers) {
    h = ((layer.W * h).colwise() + layer.b).eval();
    if (layer.tanh_activation) h = h.array().tanh();
  }
  return h;
}

Vec DynamicsModel::forward(const Vec& s, const Vec& a) const {
  if (static_cast<int>(s.size()) != state_dim || static_cast<int>(a.size()) != action_dim) {
    fail(ErrorCode::dimension, "forward: state/action dims do not match model");
  }
  Eigen::MatrixXd x(state_dim + action_dim, 1);
  for (int i = 0; i < state_dim; ++i) x(i, 0) = s[static_cast<std::size_t>(i)];
  for (int j = 0; j < action_dim; ++j) x(state_dim + j, 0) = a[static_cast<std::size_t>(j)];
  Eigen::MatrixXd next = step_batch(x.topRows(state_dim), x.bottomRows(action_dim));
  return Vec(next.data(), next.data() + state_dim);
}

Eigen::MatrixXd DynamicsModel::step_batch(const Eigen::MatrixXd& states,
                                          const Eigen::MatrixXd& actions) const {
  if (states.rows() != state_dim || actions.rows() != action_dim || states.cols() != actions.cols()) {
    fail(ErrorCode::dimension, "step_batch: shape mismatch");
  }
  const Eigen::Index B = states.cols();
  const int in_dim = state_dim + action_dim;
  Eigen::MatrixXd x(in_dim, B);
  x.topRows(state_dim) = states;
  x.bottomRows(action_dim) = actions;

  const Eigen::VectorXd in_mean = to_eigen(in_stats.mean);
  const Eigen::VectorXd in_std = to_eigen(in_stats.std);
  x = ((x.colwise() - in_mean).array().colwise() / in_std.array()).matrix();

  Eigen::MatrixXd delta = net(x);
  const Eigen::VectorXd out_mean = to_eigen(out_stats.mean);
  const Eigen::VectorXd out_std = to_eigen(out_stats.std);
  delta = ((delta.array().colwise() * out_std.array()).colwise() + out_mean.array()).matrix();
  return states + delta;
}

Trajectory DynamicsModel::rollout(const Vec& s0, const std::vector<Vec>& actions,
                                  const std::vector<std::string>& names, double dt) const {
  if (actions.empty()) fail(ErrorCode::invalid_argument, "rollout: needs at least one action");
  Trajectory traj;
  traj.dt = dt;
  traj.names = names;
  if (traj.names.empty()) {
    for (int i = 0; i < state_dim; ++i) traj.names.push_back("s" + std::to_string(i));
  }
  traj.samples.reserve(actions.size() + 1);
  traj.samples.push_back(s0);
  Vec s = s0;
  for (const Vec& a : actions) {
    s = forward(s, a);
    if (!all_finite(s)) fail(ErrorCode::numeric, "rollout: model produced a non-finite state");
    traj.samples.push_back(s);
  }
  return traj;
}

double loss(const DynamicsModel& model, std::span<const Transition> batch) {
  if (batch.empty()) fail(ErrorCode::invalid_argument, "loss: empty batch");
  const BatchMatrices m = assemble(model, batch);
  return loss_from(model.net(m.x), m.d);
}

MlpParams gradients(const DynamicsModel& model, std::span<const Transition> batch) {
  if (batch.empty()) fail(ErrorCode::invalid_argument, "gradients: empty batch");
  const BatchMatrices m = assemble(model, batch);
  const auto acts = forward_store(model.params, m.x);
  return backprop(model.params, acts, m.d);
}

DynamicsModel train(const Dataset& dataset, const TrainConfig& cfg, LossCurve* curve) {
  if (cfg.learning_rate <= 0 || cfg.batch_size < 1 || cfg.epochs < 1) {
    fail(ErrorCode::invalid_argument, "train: learning_rate, batch_size and epochs must be positive");
  }
  validate_transition_dims(dataset);
  if (dataset.transitions.empty()) fail(ErrorCode::invalid_argument, "train: empty dataset");

  Dataset ds = dataset;
  ds.split_fraction = cfg.split_fraction;
  auto [train_set, val_set] = split(ds, cfg.seed);
  if (static_cast<int>(train_set.size()) < cfg.batch_size) {
    fail(ErrorCode::invalid_argument, "train: batch_size exceeds the train split (" +
                                          std::to_string(train_set.size()) + " transitions)");
  }

  DynamicsModel model;
  model.state_dim = static_cast<int>(train_set[0].state.size());
  model.action_dim = static_cast<int>(train_set[0].action.size());

  std::vector<Vec> inputs, targets;
  inputs.reserve(train_set.size());
  targets.reserve(train_set.size());
  for (const Transition& tr : train_set) {
    Vec x = tr.state;
    x.insert(x.end(), tr.action.begin(), tr.action.end());
    inputs.push_back(std::move(x));
    Vec d(tr.state.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = tr.next_state[i] - tr.state[i];
    targets.push_back(std::move(d));
  }
  model.in_stats = compute_norm_stats(inputs);
  model.out_stats = compute_norm_stats(targets);
  model.params = init_params(model.state_dim + model.action_dim, model.state_dim,
                             cfg.hidden_sizes, cfg.seed);

  const BatchMatrices train_m = assemble(model, train_set);
  BatchMatrices val_m;
  if (!val_set.empty()) val_m = assemble(model, val_set);

  MlpParams velocity;
  velocity.layers.resize(model.params.layers.size());
  for (std::size_t l = 0; l < velocity.layers.size(); ++l) {
    velocity.layers[l].W = Eigen::MatrixXd::Zero(model.params.layers[l].W.rows(),
                                                 model.params.layers[l].W.cols());
    velocity.layers[l].b = Eigen::VectorXd::Zero(model.params.layers[l].b.size());
  }

  const auto N = static_cast<std::size_t>(train_m.x.cols());
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  const int in_dim = model.state_dim + model.action_dim;
  Eigen::MatrixXd xb(in_dim, cfg.batch_size), db(model.state_dim, cfg.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng = make_rng(mix_seed(cfg.seed, 100 + static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_loss = 0;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < N; start += static_cast<std::size_t>(cfg.batch_size)) {
      const auto bsz = static_cast<Eigen::Index>(
          std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), N - start));
      for (Eigen::Index k = 0; k < bsz; ++k) {
        const auto src = static_cast<Eigen::Index>(order[start + static_cast<std::size_t>(k)]);
        xb.col(k) = train_m.x.col(src);
        db.col(k) = train_m.d.col(src);
      }
      const auto acts = forward_store(model.params, xb.leftCols(bsz));
      const double batch_loss = loss_from(acts.back(), db.leftCols(bsz));
      if (!std::isfinite(batch_loss)) {
        fail(ErrorCode::numeric, "train: loss became non-finite at epoch " + std::to_string(epoch + 1));
      }
      epoch_loss += batch_loss;
      ++n_batches;

      const MlpParams grads = backprop(model.params, acts, db.leftCols(bsz));
      for (std::size_t l = 0; l < model.params.layers.size(); ++l) {
        velocity.layers[l].W = cfg.momentum * velocity.layers[l].W - cfg.learning_rate * grads.layers[l].W;
        velocity.layers[l].b = cfg.momentum * velocity.layers[l].b - cfg.learning_rate * grads.layers[l].b;
        model.params.layers[l].W += velocity.layers[l].W;
        model.params.layers[l].b += velocity.layers[l].b;
      }
    }

    if (curve) {
      curve->train.push_back(epoch_loss / static_cast<double>(n_batches));
      if (!val_set.empty()) {
        curve->val.push_back(loss_from(model.net(val_m.x), val_m.d));
      } else {
        curve->val.push_back(std::numeric_limits<double>::quiet_NaN());
      }
    }
  }
  return model;
}

void save_checkpoint(const DynamicsModel& model, const TrainConfig& cfg, const std::string& path) {
  json j;
  j["format"] = "stlmpc-model";
  j["version"] = 1;
  j["state_dim"] = model.state_dim;
  j["action_dim"] = model.action_dim;
  j["in_mean"] = model.in_stats.mean;
  j["in_std"] = model.in_stats.std;
  j["out_mean"] = model.out_stats.mean;
  j["out_std"] = model.out_stats.std;
  json layers = json::array();
  for (const Layer& layer : model.params.layers) layers.push_back(layer_to_json(layer));
  j["layers"] = std::move(layers);
  j["train_config"] = {
      {"hidden_sizes", cfg.hidden_sizes}, {"learning_rate", cfg.learning_rate},
      {"momentum", cfg.momentum},         {"batch_size", cfg.batch_size},
      {"epochs", cfg.epochs},             {"seed", cfg.seed},
      {"split_fraction", cfg.split_fraction},
  };
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot write checkpoint: " + path);
  out << j.dump(2) << "\n";
  if (!out) fail(ErrorCode::io, "write failed: " + path);
}

DynamicsModel load_checkpoint(const std::string& path, TrainConfig* cfg_out) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot read checkpoint: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, "bad checkpoint JSON in " + path + ": " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "stlmpc-model") {
      fail(ErrorCode::parse, "not a model checkpoint: " + path);
    }
    DynamicsModel model;
    model.state_dim = j.at("state_dim").get<int>();
    model.action_dim = j.at("action_dim").get<int>();
    model.in_stats.mean = j.at("in_mean").get<Vec>();
    model.in_stats.std = j.at("in_std").get<Vec>();
    model.out_stats.mean = j.at("out_mean").get<Vec>();
    model.out_stats.std = j.at("out_std").get<Vec>();
    for (const json& lj : j.at("layers")) model.params.layers.push_back(layer_from_json(lj));

    const int in_dim = model.state_dim + model.action_dim;
    if (static_cast<int>(model.in_stats.mean.size()) != in_dim ||
        static_cast<int>(model.in_stats.std.size()) != in_dim ||
        static_cast<int>(model.out_stats.mean.size()) != model.state_dim ||
        static_cast<int>(model.out_stats.std.size()) != model.state_dim ||
        model.params.layers.empty() || model.params.layers.front().W.cols() != in_dim ||
        model.params.layers.back().W.rows() != model.state_dim) {
      fail(ErrorCode::parse, "checkpoint dimensions are inconsistent: " + path);
    }
    for (std::size_t l = 0; l + 1 < model.params.layers.size(); ++l) {
      if (model.params.layers[l].W.rows() != model.params.layers[l + 1].W.cols()) {
        fail(ErrorCode::parse, "checkpoint layer dimensions do not chain: " + path);
      }
    }

    if (cfg_out) {
      const json& tc = j.at("train_config");
      cfg_out->hidden_sizes = tc.at("hidden_sizes").get<std::vector<int>>();
      cfg_out->learning_rate = tc.at("learning_rate").get<double>();
      cfg_out->momentum = tc.at("momentum").get<double>();
      cfg_out->batch_size = tc.at("batch_size").get<int>();
      cfg_out->epochs = tc.at("epochs").get<int>();
      cfg_out->seed = tc.at("seed").get<std::uint64_t>();
      cfg_out->split_fraction = tc.at("split_fraction").get<double>();
    }
    return model;
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, "bad checkpoint fields in " + path + ": " + e.what());
  }
}

}  // namespace stlmpc
