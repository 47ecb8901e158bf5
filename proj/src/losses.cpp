#include "jamloc/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jamloc {

template <typename T>
LossGrad<T> loss_rec(const Tensor<T>& recon, const Tensor<T>& clean) {
  if (recon.shape() != clean.shape())
    throw std::invalid_argument("loss_rec: shape mismatch " + recon.shape_string() + " vs " +
                                clean.shape_string());
  if (recon.rank() == 0 || recon.dim(0) == 0) throw std::invalid_argument("loss_rec: empty batch");
  const double n = recon.dim(0);
  LossGrad<T> out{0.0, Tensor<T>(recon.shape())};
  for (std::size_t i = 0; i < recon.size(); ++i) {
    const double d = static_cast<double>(recon[i]) - static_cast<double>(clean[i]);
    out.value += d * d;
    out.grad[i] = static_cast<T>(2.0 * d / n);
  }
  out.value /= n;
  return out;
}

template <typename T>
LossGrad<T> loss_dom(const Tensor<T>& probs, std::span<const T> labels) {
  if (probs.size() != labels.size() || probs.empty())
    throw std::invalid_argument("loss_dom: probabilities and labels differ in length");
  const double n = static_cast<double>(probs.size());
  LossGrad<T> out{0.0, Tensor<T>(probs.shape())};
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double raw = probs[i];
    const double p = std::clamp(raw, kProbClamp, 1.0 - kProbClamp);
    const double y = labels[i];
    out.value -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
    const bool clamped = raw < kProbClamp || raw > 1.0 - kProbClamp;
    out.grad[i] = clamped ? T(0) : static_cast<T>((-y / p + (1.0 - y) / (1.0 - p)) / n);
  }
  out.value /= n;
  return out;
}

template <typename T>
LossGrad<T> loss_reg(const Tensor<T>& pred, const Tensor<T>& truth) {
  if (pred.shape() != truth.shape() || pred.rank() != 2)
    throw std::invalid_argument("loss_reg: shape mismatch " + pred.shape_string() + " vs " +
                                truth.shape_string());
  const double n = pred.dim(0);
  LossGrad<T> out{0.0, Tensor<T>(pred.shape())};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = static_cast<double>(pred[i]) - static_cast<double>(truth[i]);
    out.value += d * d;
    out.grad[i] = static_cast<T>(2.0 * d / n);
  }
  out.value /= n;
  return out;
}

double loss_adapt(double l_rec, double l_dom, double lambda) { return l_rec + lambda * l_dom; }

double loss_ft(double l_rec_ft, double l_reg, double l_dom_ft, double alpha, double beta,
               double lambda_ft) {
  return alpha * l_rec_ft + beta * l_reg + lambda_ft * l_dom_ft;
}

template LossGrad<float> loss_rec<float>(const Tensor<float>&, const Tensor<float>&);
template LossGrad<double> loss_rec<double>(const Tensor<double>&, const Tensor<double>&);
template LossGrad<float> loss_dom<float>(const Tensor<float>&, std::span<const float>);
template LossGrad<double> loss_dom<double>(const Tensor<double>&, std::span<const double>);
template LossGrad<float> loss_reg<float>(const Tensor<float>&, const Tensor<float>&);
template LossGrad<double> loss_reg<double>(const Tensor<double>&, const Tensor<double>&);

}  // namespace jamloc
