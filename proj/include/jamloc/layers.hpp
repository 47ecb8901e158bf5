#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "jamloc/kernels.hpp"
#include "jamloc/tensor.hpp"

namespace jamloc::nn {

template <typename T>
struct Param {
  std::string name;
  std::vector<int> shape;
  std::vector<T> value;
  std::vector<T> grad;
  bool trainable = true;

  Param() = default;
  Param(std::string n, std::vector<int> s)
      : name(std::move(n)), shape(std::move(s)), value(Tensor<T>::count(shape), T(0)),
        grad(value.size(), T(0)) {}

  std::size_t size() const { return value.size(); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }
  // Gradient sink for kernels: empty when frozen so the kernel skips the work.
  std::span<T> grad_sink() { return trainable ? std::span<T>(grad) : std::span<T>(); }
};

template <typename T>
using ParamList = std::vector<Param<T>*>;

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
template <typename T>
void init_uniform(Param<T>& p, int fan_in, std::mt19937_64& rng);

template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(const std::string& name, int in, int out, std::mt19937_64& rng);

  // x viewed as [rows, in]; output keeps leading dims with last = out.
  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& dy, bool need_input_grad = true);
  void collect(ParamList<T>& out) { out.push_back(&weight); out.push_back(&bias); }

  int in_features() const { return in_; }
  int out_features() const { return out_; }

  Param<T> weight;  // [in, out]
  Param<T> bias;    // [out]

 private:
  int in_ = 0, out_ = 0;
  Tensor<T> input_;
};

template <typename T>
class Conv1d {
 public:
  Conv1d() = default;
  Conv1d(const std::string& name, int in_ch, int out_ch, int kernel, int stride, int pad,
         std::mt19937_64& rng);

  // x: [B, L, in_ch] -> [B, L_out, out_ch]
  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& dy, bool need_input_grad = true);
  void collect(ParamList<T>& out) { out.push_back(&weight); out.push_back(&bias); }
  int out_len(int in_len) const { return (in_len + 2 * pad_ - kernel_) / stride_ + 1; }

  Param<T> weight;  // [kernel * in_ch, out_ch]
  Param<T> bias;

 private:
  kernels::ConvGeometry geometry(int batch, int len) const;
  int in_ch_ = 0, out_ch_ = 0, kernel_ = 1, stride_ = 1, pad_ = 0;
  Tensor<T> input_;
};

template <typename T>
class ConvTranspose1d {
 public:
  ConvTranspose1d() = default;
  ConvTranspose1d(const std::string& name, int in_ch, int out_ch, int kernel, int stride,
                  int pad, int output_pad, std::mt19937_64& rng);

  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& dy, bool need_input_grad = true);
  void collect(ParamList<T>& out) { out.push_back(&weight); out.push_back(&bias); }
  int out_len(int in_len) const {
    return (in_len - 1) * stride_ - 2 * pad_ + kernel_ + output_pad_;
  }

  Param<T> weight;  // [in_ch, kernel * out_ch]
  Param<T> bias;

 private:
  kernels::ConvGeometry geometry(int batch, int len) const;
  int in_ch_ = 0, out_ch_ = 0, kernel_ = 1, stride_ = 1, pad_ = 0, output_pad_ = 0;
  Tensor<T> input_;
};

template <typename T>
class DepthwiseConv1d {
 public:
  DepthwiseConv1d() = default;
  DepthwiseConv1d(const std::string& name, int ch, int kernel, std::mt19937_64& rng);

  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& dy, bool need_input_grad = true);
  void collect(ParamList<T>& out) { out.push_back(&weight); out.push_back(&bias); }

  Param<T> weight;  // [kernel, ch]
  Param<T> bias;

 private:
  int ch_ = 0, kernel_ = 1;
  Tensor<T> input_;
};

// Normalizes each position over the channel axis.
template <typename T>
class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(const std::string& name, int ch, T eps = T(1e-6));

  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& dy, bool need_input_grad = true);
  void collect(ParamList<T>& out) { out.push_back(&gamma); out.push_back(&beta); }

  Param<T> gamma;
  Param<T> beta;

 private:
  int ch_ = 0;
  T eps_ = T(1e-6);
  std::vector<T> xhat_, rstd_;
};

template <typename T>
class Gelu {
 public:
  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& dy);

 private:
  Tensor<T> input_;
};

template <typename T>
class Relu {
 public:
  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& dy);

 private:
  Tensor<T> input_;
};

// Identity forward; backward multiplies the upstream gradient by -lambda.
template <typename T>
class GradReversal {
 public:
  explicit GradReversal(T lambda = T(0)) { set_lambda(lambda); }
  void set_lambda(T lambda);
  T lambda() const { return lambda_; }

  Tensor<T> forward(const Tensor<T>& x) const { return x; }
  Tensor<T> backward(const Tensor<T>& dy) const;

 private:
  T lambda_ = T(0);
};

// Additive N(0, sigma^2) noise, active only in training mode.
template <typename T>
class GaussianNoise {
 public:
  explicit GaussianNoise(T sigma = T(0)) : sigma_(sigma) {}
  Tensor<T> forward(const Tensor<T>& x, bool training, std::mt19937_64& rng) const;
  T sigma() const { return sigma_; }

 private:
  T sigma_;
};

// depthwise conv -> layer norm -> pointwise expand -> GELU -> pointwise
// project -> residual add.
template <typename T>
class ConvNeXtBlock {
 public:
  ConvNeXtBlock() = default;
  ConvNeXtBlock(const std::string& name, int ch, int kernel, int expansion,
                std::mt19937_64& rng);

  Tensor<T> forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& dy, bool need_input_grad = true);
  void collect(ParamList<T>& out);

 private:
  DepthwiseConv1d<T> dw_;
  LayerNorm<T> norm_;
  Linear<T> expand_;
  Gelu<T> act_;
  Linear<T> project_;
};

// Free-function form of the reversal layer.
template <typename T>
Tensor<T> grl_forward(const Tensor<T>& x, T lambda);
template <typename T>
Tensor<T> grl_backward(const Tensor<T>& upstream, T lambda);

template <typename T>
std::size_t count_params(const ParamList<T>& params) {
  std::size_t n = 0;
  for (const auto* p : params) n += p->size();
  return n;
}

}  // namespace jamloc::nn
