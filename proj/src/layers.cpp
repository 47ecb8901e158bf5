#include "jamloc/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace jamloc::nn {

template <typename T>
void init_uniform(Param<T>& p, int fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : p.value) v = static_cast<T>(dist(rng));
}

// ---------------------------------------------------------------- Linear

template <typename T>
Linear<T>::Linear(const std::string& name, int in, int out, std::mt19937_64& rng)
    : weight(name + ".weight", {in, out}), bias(name + ".bias", {out}), in_(in), out_(out) {
  init_uniform(weight, in, rng);
  init_uniform(bias, in, rng);
}

template <typename T>
Tensor<T> Linear<T>::forward(const Tensor<T>& x) {
  if (x.cols() != in_)
    throw std::invalid_argument("linear " + weight.name + ": expected " + std::to_string(in_) +
                                " features, got " + x.shape_string());
  input_ = x;
  std::vector<int> shape = x.shape();
  shape.back() = out_;
  Tensor<T> y(shape);
  kernels::linear_forward<T>(x.rows(), in_, out_, x.span(), weight.value, bias.value, y.span());
  return y;
}

template <typename T>
Tensor<T> Linear<T>::backward(const Tensor<T>& dy, bool need_input_grad) {
  Tensor<T> dx;
  if (need_input_grad) dx = Tensor<T>(input_.shape());
  kernels::linear_backward<T>(input_.rows(), in_, out_, input_.span(), weight.value, dy.span(),
                              dx.span(), weight.grad_sink(), bias.grad_sink());
  return dx;
}

// ---------------------------------------------------------------- Conv1d

template <typename T>
Conv1d<T>::Conv1d(const std::string& name, int in_ch, int out_ch, int kernel, int stride,
                  int pad, std::mt19937_64& rng)
    : weight(name + ".weight", {kernel * in_ch, out_ch}),
      bias(name + ".bias", {out_ch}),
      in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), stride_(stride), pad_(pad) {
  init_uniform(weight, kernel * in_ch, rng);
  init_uniform(bias, kernel * in_ch, rng);
}

template <typename T>
kernels::ConvGeometry Conv1d<T>::geometry(int batch, int len) const {
  return {batch, len, in_ch_, out_ch_, kernel_, stride_, pad_, 0};
}

template <typename T>
Tensor<T> Conv1d<T>::forward(const Tensor<T>& x) {
  if (x.rank() != 3 || x.dim(2) != in_ch_)
    throw std::invalid_argument("conv " + weight.name + ": bad input " + x.shape_string());
  input_ = x;
  const auto g = geometry(x.dim(0), x.dim(1));
  Tensor<T> y({x.dim(0), g.conv_out_len(), out_ch_});
  kernels::conv1d_forward<T>(g, x.span(), weight.value, bias.value, y.span());
  return y;
}

template <typename T>
Tensor<T> Conv1d<T>::backward(const Tensor<T>& dy, bool need_input_grad) {
  Tensor<T> dx;
  if (need_input_grad) dx = Tensor<T>(input_.shape());
  kernels::conv1d_backward<T>(geometry(input_.dim(0), input_.dim(1)), input_.span(),
                              weight.value, dy.span(), dx.span(), weight.grad_sink(),
                              bias.grad_sink());
  return dx;
}

// ---------------------------------------------------------------- ConvTranspose1d

template <typename T>
ConvTranspose1d<T>::ConvTranspose1d(const std::string& name, int in_ch, int out_ch,
                                    int kernel, int stride, int pad, int output_pad,
                                    std::mt19937_64& rng)
    : weight(name + ".weight", {in_ch, kernel * out_ch}),
      bias(name + ".bias", {out_ch}),
      in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), stride_(stride), pad_(pad),
      output_pad_(output_pad) {
  init_uniform(weight, kernel * out_ch, rng);
  init_uniform(bias, kernel * out_ch, rng);
}

template <typename T>
kernels::ConvGeometry ConvTranspose1d<T>::geometry(int batch, int len) const {
  return {batch, len, in_ch_, out_ch_, kernel_, stride_, pad_, output_pad_};
}

template <typename T>
Tensor<T> ConvTranspose1d<T>::forward(const Tensor<T>& x) {
  if (x.rank() != 3 || x.dim(2) != in_ch_)
    throw std::invalid_argument("conv_transpose " + weight.name + ": bad input " +
                                x.shape_string());
  input_ = x;
  const auto g = geometry(x.dim(0), x.dim(1));
  Tensor<T> y({x.dim(0), g.transpose_out_len(), out_ch_});
  kernels::conv_transpose1d_forward<T>(g, x.span(), weight.value, bias.value, y.span());
  return y;
}

template <typename T>
Tensor<T> ConvTranspose1d<T>::backward(const Tensor<T>& dy, bool need_input_grad) {
  Tensor<T> dx;
  if (need_input_grad) dx = Tensor<T>(input_.shape());
  kernels::conv_transpose1d_backward<T>(geometry(input_.dim(0), input_.dim(1)), input_.span(),
                                        weight.value, dy.span(), dx.span(),
                                        weight.grad_sink(), bias.grad_sink());
  return dx;
}

// ---------------------------------------------------------------- DepthwiseConv1d

template <typename T>
DepthwiseConv1d<T>::DepthwiseConv1d(const std::string& name, int ch, int kernel,
                                    std::mt19937_64& rng)
    : weight(name + ".weight", {kernel, ch}), bias(name + ".bias", {ch}), ch_(ch),
      kernel_(kernel) {
  init_uniform(weight, kernel, rng);
  init_uniform(bias, kernel, rng);
}

template <typename T>
Tensor<T> DepthwiseConv1d<T>::forward(const Tensor<T>& x) {
  if (x.rank() != 3 || x.dim(2) != ch_)
    throw std::invalid_argument("depthwise " + weight.name + ": bad input " + x.shape_string());
  input_ = x;
  Tensor<T> y(x.shape());
  kernels::depthwise_forward<T>(x.dim(0), x.dim(1), ch_, kernel_, (kernel_ - 1) / 2, x.span(),
                                weight.value, bias.value, y.span());
  return y;
}

template <typename T>
Tensor<T> DepthwiseConv1d<T>::backward(const Tensor<T>& dy, bool need_input_grad) {
  Tensor<T> dx;
  if (need_input_grad) dx = Tensor<T>(input_.shape());
  kernels::depthwise_backward<T>(input_.dim(0), input_.dim(1), ch_, kernel_, (kernel_ - 1) / 2,
                                 input_.span(), weight.value, dy.span(), dx.span(),
                                 weight.grad_sink(), bias.grad_sink());
  return dx;
}

// ---------------------------------------------------------------- LayerNorm

template <typename T>
LayerNorm<T>::LayerNorm(const std::string& name, int ch, T eps)
    : gamma(name + ".gamma", {ch}), beta(name + ".beta", {ch}), ch_(ch), eps_(eps) {
  std::fill(gamma.value.begin(), gamma.value.end(), T(1));
}

template <typename T>
Tensor<T> LayerNorm<T>::forward(const Tensor<T>& x) {
  if (x.cols() != ch_)
    throw std::invalid_argument("layernorm " + gamma.name + ": bad input " + x.shape_string());
  Tensor<T> y(x.shape());
  xhat_.resize(x.size());
  rstd_.resize(x.rows());
  kernels::layernorm_forward<T>(x.rows(), ch_, eps_, x.span(), gamma.value, beta.value,
                                y.span(), xhat_, rstd_);
  return y;
}

template <typename T>
Tensor<T> LayerNorm<T>::backward(const Tensor<T>& dy, bool need_input_grad) {
  Tensor<T> dx;
  if (need_input_grad) dx = Tensor<T>(dy.shape());
  std::span<T> dgamma = gamma.grad_sink();
  std::span<T> dbeta = beta.grad_sink();
  kernels::layernorm_backward<T>(dy.rows(), ch_, xhat_, rstd_, gamma.value, dy.span(),
                                 dx.span(), dgamma, dbeta);
  return dx;
}

// ---------------------------------------------------------------- activations

template <typename T>
Tensor<T> Gelu<T>::forward(const Tensor<T>& x) {
  input_ = x;
  Tensor<T> y(x.shape());
  kernels::gelu_forward<T>(x.span(), y.span());
  return y;
}

template <typename T>
Tensor<T> Gelu<T>::backward(const Tensor<T>& dy) {
  Tensor<T> dx(dy.shape());
  kernels::gelu_backward<T>(input_.span(), dy.span(), dx.span());
  return dx;
}

template <typename T>
Tensor<T> Relu<T>::forward(const Tensor<T>& x) {
  input_ = x;
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
  return y;
}

template <typename T>
Tensor<T> Relu<T>::backward(const Tensor<T>& dy) {
  Tensor<T> dx(dy.shape());
  for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = input_[i] > T(0) ? dy[i] : T(0);
  return dx;
}

// ---------------------------------------------------------------- GRL

template <typename T>
void GradReversal<T>::set_lambda(T lambda) {
  if (!(lambda >= T(0)))
    throw std::invalid_argument("gradient reversal strength must be non-negative");
  lambda_ = lambda;
}

template <typename T>
Tensor<T> GradReversal<T>::backward(const Tensor<T>& dy) const {
  return grl_backward(dy, lambda_);
}

template <typename T>
Tensor<T> grl_forward(const Tensor<T>& x, T lambda) {
  if (!(lambda >= T(0)))
    throw std::invalid_argument("gradient reversal strength must be non-negative");
  return x;
}

template <typename T>
Tensor<T> grl_backward(const Tensor<T>& upstream, T lambda) {
  if (!(lambda >= T(0)))
    throw std::invalid_argument("gradient reversal strength must be non-negative");
  Tensor<T> dx(upstream.shape());
  for (std::size_t i = 0; i < upstream.size(); ++i) dx[i] = -lambda * upstream[i];
  return dx;
}

// ---------------------------------------------------------------- noise

template <typename T>
Tensor<T> GaussianNoise<T>::forward(const Tensor<T>& x, bool training,
                                    std::mt19937_64& rng) const {
  if (!training || sigma_ == T(0)) return x;
  std::normal_distribution<double> dist(0.0, static_cast<double>(sigma_));
  Tensor<T> y = x;
  for (auto& v : y.values()) v += static_cast<T>(dist(rng));
  return y;
}

// ---------------------------------------------------------------- ConvNeXt

template <typename T>
ConvNeXtBlock<T>::ConvNeXtBlock(const std::string& name, int ch, int kernel, int expansion,
                                std::mt19937_64& rng)
    : dw_(name + ".dw", ch, kernel, rng),
      norm_(name + ".norm", ch),
      expand_(name + ".pw1", ch, expansion * ch, rng),
      project_(name + ".pw2", expansion * ch, ch, rng) {}

template <typename T>
Tensor<T> ConvNeXtBlock<T>::forward(const Tensor<T>& x) {
  Tensor<T> h = project_.forward(act_.forward(expand_.forward(norm_.forward(dw_.forward(x)))));
  for (std::size_t i = 0; i < h.size(); ++i) h[i] += x[i];
  return h;
}

template <typename T>
Tensor<T> ConvNeXtBlock<T>::backward(const Tensor<T>& dy, bool need_input_grad) {
  Tensor<T> g = project_.backward(dy);
  g = act_.backward(g);
  g = expand_.backward(g);
  g = norm_.backward(g);
  if (!need_input_grad) {
    dw_.backward(g, false);
    return {};
  }
  Tensor<T> dx = dw_.backward(g);
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i];
  return dx;
}

template <typename T>
void ConvNeXtBlock<T>::collect(ParamList<T>& out) {
  dw_.collect(out);
  norm_.collect(out);
  expand_.collect(out);
  project_.collect(out);
}

#define JAMLOC_INSTANTIATE_LAYERS(T)                                                  \
  template void init_uniform<T>(Param<T>&, int, std::mt19937_64&);                   \
  template class Linear<T>;                                                          \
  template class Conv1d<T>;                                                          \
  template class ConvTranspose1d<T>;                                                 \
  template class DepthwiseConv1d<T>;                                                 \
  template class LayerNorm<T>;                                                       \
  template class Gelu<T>;                                                            \
  template class Relu<T>;                                                            \
  template class GradReversal<T>;                                                    \
  template class GaussianNoise<T>;                                                   \
  template class ConvNeXtBlock<T>;                                                   \
  template Tensor<T> grl_forward<T>(const Tensor<T>&, T);                            \
  template Tensor<T> grl_backward<T>(const Tensor<T>&, T);

JAMLOC_INSTANTIATE_LAYERS(float)
JAMLOC_INSTANTIATE_LAYERS(double)

}  // namespace jamloc::nn
