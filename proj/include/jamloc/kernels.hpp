#pragma once

#include <span>

// Numerical kernels behind the network layers. All activations are
// channels-last: element (b, l, c) of a [B, L, C] buffer lives at
// (b * L + l) * C + c.
//
// Two implementations share every signature:
//   jamloc::kernels::          GEMM-backed (Eigen) with OpenMP over batch/rows
//   jamloc::kernels::serial::  direct loops straight from the definitions
// The serial versions are the reference for the kernel tests and the
// baseline in bench/. Backward kernels accumulate into weight and bias
// gradients (+=) and overwrite the input gradient. Weight gradient
// pointers may be empty to skip that work for frozen layers.
namespace jamloc::kernels {

struct ConvGeometry {
  int batch = 0;
  int in_len = 0;
  int in_ch = 0;
  int out_ch = 0;
  int kernel = 1;
  int stride = 1;
  int pad = 0;
  int output_pad = 0;  // transposed convolution only

  int conv_out_len() const { return (in_len + 2 * pad - kernel) / stride + 1; }
  int transpose_out_len() const {
    return (in_len - 1) * stride - 2 * pad + kernel + output_pad;
  }
};

// Strided 1-D convolution. w is [kernel * in_ch, out_ch], row index
// j * in_ch + ci.
template <typename T>
void conv1d_forward(const ConvGeometry& g, std::span<const T> x, std::span<const T> w,
                    std::span<const T> b, std::span<T> y);
template <typename T>
void conv1d_backward(const ConvGeometry& g, std::span<const T> x, std::span<const T> w,
                     std::span<const T> dy, std::span<T> dx, std::span<T> dw,
                     std::span<T> db);

// Transposed 1-D convolution (adjoint of conv1d). w is [in_ch, kernel * out_ch],
// column index j * out_ch + co.
template <typename T>
void conv_transpose1d_forward(const ConvGeometry& g, std::span<const T> x,
                              std::span<const T> w, std::span<const T> b, std::span<T> y);
template <typename T>
void conv_transpose1d_backward(const ConvGeometry& g, std::span<const T> x,
                               std::span<const T> w, std::span<const T> dy, std::span<T> dx,
                               std::span<T> dw, std::span<T> db);

// Depthwise convolution, stride 1, "same" length when pad = (kernel - 1) / 2.
// w is [kernel, ch].
template <typename T>
void depthwise_forward(int batch, int len, int ch, int kernel, int pad, std::span<const T> x,
                       std::span<const T> w, std::span<const T> b, std::span<T> y);
template <typename T>
void depthwise_backward(int batch, int len, int ch, int kernel, int pad, std::span<const T> x,
                        std::span<const T> w, std::span<const T> dy, std::span<T> dx,
                        std::span<T> dw, std::span<T> db);

// Layer normalization over the last axis. Saves normalized values and
// reciprocal std for the backward pass.
template <typename T>
void layernorm_forward(int rows, int ch, T eps, std::span<const T> x, std::span<const T> gamma,
                       std::span<const T> beta, std::span<T> y, std::span<T> xhat,
                       std::span<T> rstd);
template <typename T>
void layernorm_backward(int rows, int ch, std::span<const T> xhat, std::span<const T> rstd,
                        std::span<const T> gamma, std::span<const T> dy, std::span<T> dx,
                        std::span<T> dgamma, std::span<T> dbeta);

// y = x w + b with x [rows, in], w [in, out].
template <typename T>
void linear_forward(int rows, int in, int out, std::span<const T> x, std::span<const T> w,
                    std::span<const T> b, std::span<T> y);
template <typename T>
void linear_backward(int rows, int in, int out, std::span<const T> x, std::span<const T> w,
                     std::span<const T> dy, std::span<T> dx, std::span<T> dw,
                     std::span<T> db);

// Exact (erf) GELU.
template <typename T>
void gelu_forward(std::span<const T> x, std::span<T> y);
template <typename T>
void gelu_backward(std::span<const T> x, std::span<const T> dy, std::span<T> dx);

namespace serial {

template <typename T>
void conv1d_forward(const ConvGeometry& g, std::span<const T> x, std::span<const T> w,
                    std::span<const T> b, std::span<T> y);
template <typename T>
void conv1d_backward(const ConvGeometry& g, std::span<const T> x, std::span<const T> w,
                     std::span<const T> dy, std::span<T> dx, std::span<T> dw,
                     std::span<T> db);
template <typename T>
void conv_transpose1d_forward(const ConvGeometry& g, std::span<const T> x,
                              std::span<const T> w, std::span<const T> b, std::span<T> y);
template <typename T>
void conv_transpose1d_backward(const ConvGeometry& g, std::span<const T> x,
                               std::span<const T> w, std::span<const T> dy, std::span<T> dx,
                               std::span<T> dw, std::span<T> db);
template <typename T>
void depthwise_forward(int batch, int len, int ch, int kernel, int pad, std::span<const T> x,
                       std::span<const T> w, std::span<const T> b, std::span<T> y);
template <typename T>
void depthwise_backward(int batch, int len, int ch, int kernel, int pad, std::span<const T> x,
                        std::span<const T> w, std::span<const T> dy, std::span<T> dx,
                        std::span<T> dw, std::span<T> db);
template <typename T>
void layernorm_forward(int rows, int ch, T eps, std::span<const T> x, std::span<const T> gamma,
                       std::span<const T> beta, std::span<T> y, std::span<T> xhat,
                       std::span<T> rstd);
template <typename T>
void layernorm_backward(int rows, int ch, std::span<const T> xhat, std::span<const T> rstd,
                        std::span<const T> gamma, std::span<const T> dy, std::span<T> dx,
                        std::span<T> dgamma, std::span<T> dbeta);
template <typename T>
void linear_forward(int rows, int in, int out, std::span<const T> x, std::span<const T> w,
                    std::span<const T> b, std::span<T> y);
template <typename T>
void linear_backward(int rows, int in, int out, std::span<const T> x, std::span<const T> w,
                     std::span<const T> dy, std::span<T> dx, std::span<T> dw,
                     std::span<T> db);
template <typename T>
void gelu_forward(std::span<const T> x, std::span<T> y);
template <typename T>
void gelu_backward(std::span<const T> x, std::span<const T> dy, std::span<T> dx);

}  // namespace serial
}  // namespace jamloc::kernels
