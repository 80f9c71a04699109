#include "core/envs.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace stlmpc {

namespace {

double param(const std::map<std::string, double>& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

void check_overrides(const std::map<std::string, double>& p,
                     std::initializer_list<const char*> known, const char* env) {
  for (const auto& [key, value] : p) {
    (void)value;
    bool ok = false;
    for (const char* name : known)
      if (key == name) ok = true;
    if (!ok) fail(ErrorCode::unknown_name, std::string(env) + ": unknown constant '" + key + "'");
  }
}

void check_dims(const Vec& s, const Vec& a, int sd, int ad, const char* env) {
  if (static_cast<int>(s.size()) != sd || static_cast<int>(a.size()) != ad) {
    fail(ErrorCode::dimension, std::string(env) + ": state/action dimension mismatch");
  }
}

// ---------------------------------------------------------------------------

class CartPole final : public Environment {
 public:
  explicit CartPole(const std::map<std::string, double>& p)
      : gravity_(param(p, "gravity", 9.8)),
        m_cart_(param(p, "mass_cart", 1.0)),
        m_pole_(param(p, "mass_pole", 0.1)),
        half_len_(param(p, "pole_half_length", 0.5)),
        dt_(param(p, "dt", 0.02)),
        force_max_(param(p, "force_max", 10.0)),
        theta_max_(param(p, "theta_threshold", 12.0 * M_PI / 180.0)),
        x_max_(param(p, "x_threshold", 2.4)),
        low_{-force_max_},
        high_{force_max_} {
    check_overrides(p,
                    {"gravity", "mass_cart", "mass_pole", "pole_half_length", "dt", "force_max",
                     "theta_threshold", "x_threshold"},
                    "cartpole");
  }

  const std::string& id() const override { return id_; }
  int state_dim() const override { return 4; }
  int action_dim() const override { return 1; }
  const std::vector<std::string>& names() const override { return names_; }
  const Vec& action_low() const override { return low_; }
  const Vec& action_high() const override { return high_; }
  double dt() const override { return dt_; }

  Vec reset(std::uint64_t seed) override {
    rng_ = make_rng(mix_seed(seed, 0xCA7));
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    Vec s(4);
    for (double& v : s) v = u(rng_);
    return s;
  }

  StepResult step(const Vec& state, const Vec& action) override {
    check_dims(state, action, 4, 1, "cartpole");
    const double theta = state[0], x = state[1], theta_dot = state[2], x_dot = state[3];
    const double force = std::clamp(action[0], -force_max_, force_max_);

    const double total_mass = m_cart_ + m_pole_;
    const double sin_t = std::sin(theta), cos_t = std::cos(theta);
    const double temp = (force + m_pole_ * half_len_ * theta_dot * theta_dot * sin_t) / total_mass;
    const double theta_acc = (gravity_ * sin_t - cos_t * temp) /
                             (half_len_ * (4.0 / 3.0 - m_pole_ * cos_t * cos_t / total_mass));
    const double x_acc = temp - m_pole_ * half_len_ * theta_acc * cos_t / total_mass;

    StepResult r;
    r.next_state = {theta + dt_ * theta_dot, x + dt_ * x_dot, theta_dot + dt_ * theta_acc,
                    x_dot + dt_ * x_acc};
    const bool upright =
        std::fabs(r.next_state[0]) < theta_max_ && std::fabs(r.next_state[1]) < x_max_;
    r.has_reward = true;
    r.reward = upright ? 1.0 : 0.0;
    r.done = !upright;
    return r;
  }

 private:
  std::string id_ = "cartpole";
  std::vector<std::string> names_{"theta", "x", "theta_dot", "x_dot"};
  double gravity_, m_cart_, m_pole_, half_len_, dt_, force_max_, theta_max_, x_max_;
  Vec low_, high_;
  Rng rng_;
};

// ---------------------------------------------------------------------------

class MountainCar final : public Environment {
 public:
  explicit MountainCar(const std::map<std::string, double>& p)
      : force_(param(p, "force", 0.0015)),
        gravity_(param(p, "gravity", 0.0025)),
        v_max_(param(p, "max_speed", 0.07)),
        x_min_(param(p, "min_position", -1.2)),
        x_max_(param(p, "max_position", 0.6)),
        goal_(param(p, "goal_position", 0.4)),
        low_{-1.0},
        high_{1.0} {
    check_overrides(
        p, {"force", "gravity", "max_speed", "min_position", "max_position", "goal_position"},
        "mountain_car");
  }

  const std::string& id() const override { return id_; }
  int state_dim() const override { return 2; }
  int action_dim() const override { return 1; }
  const std::vector<std::string>& names() const override { return names_; }
  const Vec& action_low() const override { return low_; }
  const Vec& action_high() const override { return high_; }
  double dt() const override { return 1.0; }

  Vec reset(std::uint64_t seed) override {
    rng_ = make_rng(mix_seed(seed, 0x3CA));
    std::uniform_real_distribution<double> u(-0.6, -0.4);
    return {u(rng_), 0.0};
  }

  StepResult step(const Vec& state, const Vec& action) override {
    check_dims(state, action, 2, 1, "mountain_car");
    const double x = state[0];
    const double throttle = std::clamp(action[0], -1.0, 1.0);

    double v = state[1] + force_ * throttle - gravity_ * std::cos(3.0 * x);
    v = std::clamp(v, -v_max_, v_max_);
    double x_next = std::clamp(x + v, x_min_, x_max_);
    if (x_next <= x_min_ && v < 0) v = 0.0;

    StepResult r;
    r.next_state = {x_next, v};
    const bool at_goal = x_next > goal_;
    r.has_reward = true;
    r.reward = -0.1 * throttle * throttle + (at_goal ? 100.0 : 0.0);
    r.done = at_goal;
    return r;
  }

 private:
  std::string id_ = "mountain_car";
  std::vector<std::string> names_{"x", "x_dot"};
  double force_, gravity_, v_max_, x_min_, x_max_, goal_;
  Vec low_, high_;
  Rng rng_;
};

// ---------------------------------------------------------------------------

class Acc final : public Environment {
 public:
  explicit Acc(const std::map<std::string, double>& p)
      : dt_(param(p, "dt", 0.1)),
        tau_lag_(param(p, "throttle_lag", 0.2)),
        accel_max_(param(p, "accel_max", 3.0)),
        ado_v_max_(param(p, "ado_speed_max", 40.0)),
        ado_a_max_(param(p, "ado_accel_max", 3.0)),
        low_{-accel_max_},
        high_{accel_max_} {
    check_overrides(p, {"dt", "throttle_lag", "accel_max", "ado_speed_max", "ado_accel_max"},
                    "acc");
  }

  const std::string& id() const override { return id_; }
  int state_dim() const override { return 6; }
  int action_dim() const override { return 1; }
  const std::vector<std::string>& names() const override { return names_; }
  const Vec& action_low() const override { return low_; }
  const Vec& action_high() const override { return high_; }
  double dt() const override { return dt_; }

  Vec reset(std::uint64_t seed) override {
    rng_ = make_rng(mix_seed(seed, 0xACC));
    std::uniform_real_distribution<double> d_rel(25.0, 40.0);
    std::uniform_real_distribution<double> speed(15.0, 25.0);
    const double d0 = d_rel(rng_);
    const double v_ego = speed(rng_);
    const double v_ado = speed(rng_);
    resample_ado();
    return {0.0, v_ego, 0.0, d0, v_ado - v_ego, 0.0};
  }

  StepResult step(const Vec& state, const Vec& action) override {
    check_dims(state, action, 6, 1, "acc");
    const double x_ego = state[0], v_ego = state[1], a_ego = state[2];
    const double d_rel = state[3], v_rel = state[4];
    const double throttle = std::clamp(action[0], -accel_max_, accel_max_);

    if (--ado_countdown_ <= 0) resample_ado();

    const double a_next = a_ego + (dt_ / tau_lag_) * (throttle - a_ego);
    double v_ego_next = std::max(0.0, v_ego + dt_ * a_next);
    const double x_ego_next = x_ego + dt_ * v_ego_next;

    const double v_ado = v_ego + v_rel;
    const double x_ado = x_ego + d_rel;
    const double v_ado_next = std::clamp(v_ado + dt_ * ado_accel_, 0.0, ado_v_max_);
    const double x_ado_next = x_ado + dt_ * v_ado_next;

    const double d_next = x_ado_next - x_ego_next;
    const double v_rel_next = v_ado_next - v_ego_next;

    StepResult r;
    r.next_state = {x_ego_next, v_ego_next, a_next, d_next, v_rel_next, (v_rel_next - v_rel) / dt_};
    r.done = d_next <= 0.0;  // crash
    return r;
  }

 private:
  void resample_ado() {
    std::uniform_real_distribution<double> accel(-ado_a_max_, ado_a_max_);
    std::uniform_int_distribution<int> hold(5, 20);
    ado_accel_ = ado_a_max_ == 0.0 ? 0.0 : accel(rng_);
    ado_countdown_ = hold(rng_);
  }

  std::string id_ = "acc";
  std::vector<std::string> names_{"x_ego", "v_ego", "a_ego", "d_rel", "v_rel", "a_rel"};
  double dt_, tau_lag_, accel_max_, ado_v_max_, ado_a_max_;
  Vec low_, high_;
  Rng rng_;
  double ado_accel_ = 0.0;
  int ado_countdown_ = 1;
};

// ---------------------------------------------------------------------------

class Parking final : public Environment {
 public:
  explicit Parking(const std::map<std::string, double>& p)
      : dt_(param(p, "dt", 0.1)),
        wheelbase_(param(p, "wheelbase", 0.05)),
        accel_scale_(param(p, "accel_scale", 0.05)),
        v_max_(param(p, "max_speed", 0.1)),
        steer_max_(param(p, "steer_max", 0.5)),
        low_{-1.0, -steer_max_},
        high_{1.0, steer_max_} {
    check_overrides(p, {"dt", "wheelbase", "accel_scale", "max_speed", "steer_max"}, "parking");
  }

  const std::string& id() const override { return id_; }
  int state_dim() const override { return 8; }
  int action_dim() const override { return 2; }
  const std::vector<std::string>& names() const override { return names_; }
  const Vec& action_low() const override { return low_; }
  const Vec& action_high() const override { return high_; }
  double dt() const override { return dt_; }

  Vec reset(std::uint64_t seed) override {
    rng_ = make_rng(mix_seed(seed, 0x9A4));
    std::uniform_real_distribution<double> pos(-0.5, 0.5);
    std::uniform_real_distribution<double> angle(-M_PI, M_PI);
    const double x = pos(rng_), y = pos(rng_);
    const double theta = angle(rng_);
    const double xg = pos(rng_), yg = pos(rng_);
    return {x, y, 0.0, 0.0, std::cos(theta), std::sin(theta), xg, yg};
  }

  StepResult step(const Vec& state, const Vec& action) override {
    check_dims(state, action, 8, 2, "parking");
    const double x = state[0], y = state[1];
    const double cos_t = state[4], sin_t = state[5];
    const double accel = std::clamp(action[0], -1.0, 1.0);
    const double steer = std::clamp(action[1], -steer_max_, steer_max_);

    const double v = state[2] * cos_t + state[3] * sin_t;  // signed scalar speed
    const double v_next = std::clamp(v + accel * dt_ * accel_scale_, -v_max_, v_max_);
    const double theta = std::atan2(sin_t, cos_t) + (v_next / wheelbase_) * std::tan(steer) * dt_;
    const double cos_next = std::cos(theta), sin_next = std::sin(theta);
    const double vx = v_next * cos_next, vy = v_next * sin_next;

    StepResult r;
    r.next_state = {x + dt_ * vx, y + dt_ * vy, vx, vy, cos_next, sin_next, state[6], state[7]};
    return r;
  }

 private:
  std::string id_ = "parking";
  std::vector<std::string> names_{"x", "y", "vx", "vy", "cos_theta", "sin_theta", "xg", "yg"};
  double dt_, wheelbase_, accel_scale_, v_max_, steer_max_;
  Vec low_, high_;
  Rng rng_;
};

}  // namespace

std::unique_ptr<Environment> make_env(const std::string& id,
                                      const std::map<std::string, double>& overrides) {
  if (id == "cartpole") return std::make_unique<CartPole>(overrides);
  if (id == "mountain_car") return std::make_unique<MountainCar>(overrides);
  if (id == "acc") return std::make_unique<Acc>(overrides);
  if (id == "parking") return std::make_unique<Parking>(overrides);
  fail(ErrorCode::unknown_name, "unknown environment '" + id + "' (known: cartpole, mountain_car, acc, parking)");
}

std::vector<std::string> env_ids() { return {"cartpole", "mountain_car", "acc", "parking"}; }

Dataset collect(Environment& env, int n_traj, int episode_len, std::uint64_t seed) {
  if (n_traj < 1) fail(ErrorCode::invalid_argument, "collect: n_traj must be >= 1");
  if (episode_len < 1) fail(ErrorCode::invalid_argument, "collect: episode_len must be >= 1");

  Dataset ds;
  const Vec& lo = env.action_low();
  const Vec& hi = env.action_high();
  for (int traj = 0; traj < n_traj; ++traj) {
    Vec s = env.reset(mix_seed(seed, 2 * static_cast<std::uint64_t>(traj)));
    Rng action_rng = make_rng(mix_seed(seed, 2 * static_cast<std::uint64_t>(traj) + 1));
    for (int t = 0; t < episode_len; ++t) {
      Vec a(lo.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        std::uniform_real_distribution<double> u(lo[i], hi[i]);
        a[i] = u(action_rng);
      }
      StepResult r = env.step(s, a);
      ds.transitions.push_back({s, a, r.next_state});
      if (r.done) break;
      s = std::move(r.next_state);
    }
  }
  return ds;
}

EnvSpecBundle default_bundle(const std::string& env_id) {
  EnvSpecBundle b;
  b.env_id = env_id;
  if (env_id == "cartpole") {
    b.spec_text = "G ((abs(x) < 0.1) & (abs(theta) < 0.2094))";
    b.n_traj = 2000;
    b.episode_len = 200;
    b.horizon = 10;
    b.n_iter = 5;
    b.n_samples = 1000;
    b.action_repeat = 5;
    b.has_reward = true;
  } else if (env_id == "mountain_car") {
    b.spec_text = "F (x > 0.4)";
    b.n_traj = 2000;
    b.episode_len = 300;
    b.horizon = 50;
    b.n_iter = 2;
    b.n_samples = 1000;
    b.has_reward = true;
  } else if (env_id == "acc") {
    b.spec_text = "F (G ((d_rel < 50) & (d_rel > 15)))";
    b.n_traj = 400;
    b.episode_len = 300;
    b.horizon = 2;
    b.n_iter = 7;
    b.n_samples = 500;
    b.action_repeat = 5;
  } else if (env_id == "parking") {
    b.spec_text = "F ((abs(xg - x) < 0.02) & (abs(yg - y) < 0.02))";
    b.n_traj = 400;
    b.episode_len = 200;
    b.collect_len = 1000;
    b.horizon = 5;
    b.n_iter = 5;
    b.n_samples = 5;
    b.action_repeat = 8;
  } else {
    fail(ErrorCode::unknown_name, "unknown environment '" + env_id + "'");
  }
  return b;
}

}  // namespace stlmpc
