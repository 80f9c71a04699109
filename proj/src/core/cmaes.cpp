#include "core/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

namespace stlmpc {

namespace {
constexpr double kSigmaMin = 1e-12;
constexpr double kSigmaMax = 1e6;
}  // namespace

int CmaEs::default_lambda(int dim) {
  return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(dim))));
}

CmaEs::CmaEs(int dim, const Vec& mean0, double sigma0, int lambda_or_default, std::uint64_t seed)
    : rng_(make_rng(seed)) {
  if (dim < 1) fail(ErrorCode::invalid_argument, "cmaes: dim must be >= 1");
  if (static_cast<int>(mean0.size()) != dim) {
    fail(ErrorCode::dimension, "cmaes: mean0 size does not match dim");
  }
  if (!(sigma0 > 0)) fail(ErrorCode::invalid_argument, "cmaes: sigma0 must be > 0");

  n = dim;
  lambda = (lambda_or_default > 0) ? lambda_or_default : default_lambda(dim);
  if (lambda < 2) fail(ErrorCode::invalid_argument, "cmaes: lambda must be >= 2");
  mu = lambda / 2;

  weights.resize(mu);
  for (int i = 0; i < mu; ++i) {
    weights[i] = std::log(mu + 0.5) - std::log(static_cast<double>(i + 1));
  }
  weights /= weights.sum();
  mu_eff = 1.0 / weights.squaredNorm();

  const double nd = static_cast<double>(n);
  c_sigma = (mu_eff + 2.0) / (nd + mu_eff + 5.0);
  d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff - 1.0) / (nd + 1.0)) - 1.0) + c_sigma;
  c_c = (4.0 + mu_eff / nd) / (nd + 4.0 + 2.0 * mu_eff / nd);
  c_1 = 2.0 / ((nd + 1.3) * (nd + 1.3) + mu_eff);
  c_mu = std::min(1.0 - c_1,
                  2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((nd + 2.0) * (nd + 2.0) + mu_eff));
  chi_n = std::sqrt(nd) * (1.0 - 1.0 / (4.0 * nd) + 1.0 / (21.0 * nd * nd));

  mean = Eigen::Map<const Eigen::VectorXd>(mean0.data(), dim);
  sigma = sigma0;
  C = Eigen::MatrixXd::Identity(n, n);
  p_sigma = Eigen::VectorXd::Zero(n);
  p_c = Eigen::VectorXd::Zero(n);
  B_ = Eigen::MatrixXd::Identity(n, n);
  D_ = Eigen::VectorXd::Ones(n);
  inv_sqrt_C_ = Eigen::MatrixXd::Identity(n, n);
}

void CmaEs::refresh_eigen() {
  C = 0.5 * (C + C.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  if (es.info() != Eigen::Success) {
    std::fprintf(stderr, "cmaes: covariance factorization failed, resetting to identity\n");
    ++factorization_resets;
    C = Eigen::MatrixXd::Identity(n, n);
    B_ = Eigen::MatrixXd::Identity(n, n);
    D_ = Eigen::VectorXd::Ones(n);
    inv_sqrt_C_ = Eigen::MatrixXd::Identity(n, n);
    return;
  }
  const double floor = std::max(1e-14 * C.trace() / n, 1e-300);
  B_ = es.eigenvectors();
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(floor);
  D_ = ev.cwiseSqrt();
  inv_sqrt_C_ = B_ * D_.cwiseInverse().asDiagonal() * B_.transpose();
}

std::vector<Vec> CmaEs::ask() {
  refresh_eigen();
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Vec> out(static_cast<std::size_t>(lambda));
  Eigen::VectorXd z(n);
  for (int k = 0; k < lambda; ++k) {
    for (int i = 0; i < n; ++i) z[i] = gauss(rng_);
    const Eigen::VectorXd x = mean + sigma * (B_ * (D_.asDiagonal() * z));
    out[static_cast<std::size_t>(k)].assign(x.data(), x.data() + n);
  }
  return out;
}

void CmaEs::tell(const std::vector<Vec>& candidates, const Vec& fitnesses) {
  if (candidates.size() != static_cast<std::size_t>(lambda) || fitnesses.size() != candidates.size()) {
    fail(ErrorCode::dimension, "cmaes: tell expects exactly lambda candidates and fitnesses");
  }
  for (double f : fitnesses) {
    if (!std::isfinite(f)) fail(ErrorCode::numeric, "cmaes: non-finite fitness");
  }

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return fitnesses[a] > fitnesses[b]; });

  const std::size_t top = order[0];
  if (!has_best_ || fitnesses[top] > best_f_) {
    best_x_ = candidates[top];
    best_f_ = fitnesses[top];
    has_best_ = true;
  }

  std::vector<Eigen::VectorXd> y(static_cast<std::size_t>(mu));
  Eigen::VectorXd y_w = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < mu; ++i) {
    const Vec& x = candidates[order[static_cast<std::size_t>(i)]];
    if (static_cast<int>(x.size()) != n) fail(ErrorCode::dimension, "cmaes: candidate dim mismatch");
    y[static_cast<std::size_t>(i)] =
        (Eigen::Map<const Eigen::VectorXd>(x.data(), n) - mean) / sigma;
    y_w += weights[i] * y[static_cast<std::size_t>(i)];
  }

  mean += sigma * y_w;

  p_sigma = (1.0 - c_sigma) * p_sigma +
            std::sqrt(c_sigma * (2.0 - c_sigma) * mu_eff) * (inv_sqrt_C_ * y_w);

  const double ps_norm = p_sigma.norm();
  const double expo = 2.0 * static_cast<double>(generation + 1);
  const bool h_sigma =
      ps_norm / std::sqrt(1.0 - std::pow(1.0 - c_sigma, expo)) <
      (1.4 + 2.0 / (n + 1.0)) * chi_n;

  p_c = (1.0 - c_c) * p_c;
  if (h_sigma) p_c += std::sqrt(c_c * (2.0 - c_c) * mu_eff) * y_w;
  const double delta_h = h_sigma ? 0.0 : c_c * (2.0 - c_c);

  Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < mu; ++i) {
    rank_mu += weights[i] * (y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)].transpose());
  }
  C = (1.0 - c_1 - c_mu) * C + c_1 * (p_c * p_c.transpose() + delta_h * C) + c_mu * rank_mu;
  C = 0.5 * (C + C.transpose()).eval();

  sigma *= std::exp((c_sigma / d_sigma) * (ps_norm / chi_n - 1.0));
  sigma = std::clamp(sigma, kSigmaMin, kSigmaMax);

  ++generation;
}

const Vec& CmaEs::best_point() const {
  if (!has_best_) fail(ErrorCode::invalid_argument, "cmaes: best requested before any tell");
  return best_x_;
}

double CmaEs::best_fitness() const {
  if (!has_best_) fail(ErrorCode::invalid_argument, "cmaes: best requested before any tell");
  return best_f_;
}

}  // namespace stlmpc
