#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "core/common.hpp"

namespace stlmpc {

/// (mu/mu_w, lambda) CMA-ES with cumulative step-size adaptation,
/// maximization convention. Single-owner mutable; ask/tell alternate and the
/// candidates handed to tell must be exactly those returned by ask.
struct CmaEs {
  static int default_lambda(int dim);

  CmaEs(int dim, const Vec& mean0, double sigma0, int lambda_or_default, std::uint64_t seed);

  /// Draws lambda candidates m + sigma * B D z, z ~ N(0, I).
  std::vector<Vec> ask();

  /// Ranks by fitness descending (ties by candidate index) and applies mean,
  /// path, covariance and step-size updates.
  void tell(const std::vector<Vec>& candidates, const Vec& fitnesses);

  const Vec& best_point() const;
  double best_fitness() const;

  int n = 0;
  int lambda = 0;
  int mu = 0;
  Eigen::VectorXd weights;  // mu entries, positive, decreasing, sum 1
  double mu_eff = 0;
  double c_sigma = 0, d_sigma = 0, c_c = 0, c_1 = 0, c_mu = 0;
  double chi_n = 0;

  Eigen::VectorXd mean;
  double sigma = 0;
  Eigen::MatrixXd C;
  Eigen::VectorXd p_sigma, p_c;
  long generation = 0;
  long factorization_resets = 0;

 private:
  void refresh_eigen();

  Eigen::MatrixXd B_;           // eigenvectors of C
  Eigen::VectorXd D_;           // sqrt of (floored) eigenvalues
  Eigen::MatrixXd inv_sqrt_C_;  // B D^-1 B^T
  Rng rng_;

  Vec best_x_;
  double best_f_ = 0;
  bool has_best_ = false;
};

}  // namespace stlmpc
