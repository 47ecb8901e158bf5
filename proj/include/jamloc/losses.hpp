#pragma once

#include <span>

#include "jamloc/tensor.hpp"

namespace jamloc {

template <typename T>
struct LossGrad {
  double value = 0.0;
  Tensor<T> grad;  // d value / d first argument
};

inline constexpr double kProbClamp = 1e-7;

// Per-sample squared L2 norm of (recon - clean), summed over all
// channel x tap entries, averaged over the batch (leading) dimension.
template <typename T>
LossGrad<T> loss_rec(const Tensor<T>& recon, const Tensor<T>& clean);

// Mean binary cross-entropy; probabilities clamped to [1e-7, 1 - 1e-7].
// Source samples carry label 0, target samples label 1.
template <typename T>
LossGrad<T> loss_dom(const Tensor<T>& probs, std::span<const T> labels);

// Mean over samples of the squared Euclidean distance between predicted and
// true coordinates.
template <typename T>
LossGrad<T> loss_reg(const Tensor<T>& pred, const Tensor<T>& truth);

// L_rec + lambda * L_dom
double loss_adapt(double l_rec, double l_dom, double lambda);
// alpha * L_rec_ft + beta * L_reg + lambda_ft * L_dom_ft
double loss_ft(double l_rec_ft, double l_reg, double l_dom_ft, double alpha, double beta,
               double lambda_ft);

}  // namespace jamloc
