#pragma once

#include <Eigen/Dense>

#include "jamloc/tensor.hpp"

namespace jamloc {

struct AlignmentStats {
  Eigen::MatrixXd source_cov;  // shrunk
  Eigen::MatrixXd target_cov;  // shrunk
  double shrinkage = 1e-3;
  Eigen::MatrixXd transform;   // x_aligned = (x - source_mean) * transform + target_mean
  Eigen::RowVectorXd source_mean;
  Eigen::RowVectorXd target_mean;
};

inline constexpr double kDefaultShrinkage = 1e-3;

// Whitening by (C_s + s I)^(-1/2), recolouring by (C_t + s I)^(1/2).
// Covariances use the unbiased (N - 1) estimator.
AlignmentStats coral_fit(const Tensor<double>& source, const Tensor<double>& target,
                         double shrinkage = kDefaultShrinkage);
Tensor<double> coral_apply(const AlignmentStats& stats, const Tensor<double>& x);
Tensor<double> coral_transform(const Tensor<double>& source, const Tensor<double>& target,
                               double shrinkage = kDefaultShrinkage);

Eigen::MatrixXd covariance(const Tensor<double>& x);

// Biased squared MMD with k(a, b) = exp(-|a - b|^2 / (2 h^2)).
double mmd(const Tensor<double>& x, const Tensor<double>& y, double bandwidth);

struct MmdGrad {
  double value = 0;
  Tensor<double> dx;  // d value / d x
  Tensor<double> dy;
};
MmdGrad mmd_with_grad(const Tensor<double>& x, const Tensor<double>& y, double bandwidth);

// Median pairwise distance over the pooled sample (first `max_points` rows of each).
double median_bandwidth(const Tensor<double>& x, const Tensor<double>& y, int max_points = 500);

}  // namespace jamloc
