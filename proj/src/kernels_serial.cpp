// Reference kernels: direct loops over the defining sums, no im2col, no GEMM,
// no threading. Kept for testing and benchmarking the optimized set.
#include "jamloc/kernels.hpp"

#include "kernel_instantiation.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>

namespace jamloc::kernels::serial {
namespace {

inline std::size_t at3(int b, int l, int c, int len, int ch) {
  return (static_cast<std::size_t>(b) * len + l) * ch + c;
}

}  // namespace

template <typename T>
void conv1d_forward(const ConvGeometry& g, std::span<const T> x, std::span<const T> w,
                    std::span<const T> b, std::span<T> y) {
  const int out_len = g.conv_out_len();
  for (int bi = 0; bi < g.batch; ++bi)
    for (int o = 0; o < out_len; ++o)
      for (int co = 0; co < g.out_ch; ++co) {
        T acc = b[co];
        for (int j = 0; j < g.kernel; ++j) {
          const int pos = o * g.stride - g.pad + j;
          if (pos < 0 || pos >= g.in_len) continue;
          for (int ci = 0; ci < g.in_ch; ++ci)
            acc += x[at3(bi, pos, ci, g.in_len, g.in_ch)] *
                   w[static_cast<std::size_t>(j * g.in_ch + ci) * g.out_ch + co];
        }
        y[at3(bi, o, co, out_len, g.out_ch)] = acc;
      }
}

template <typename T>
void conv1d_backward(const ConvGeometry& g, std::span<const T> x, std::span<const T> w,
                     std::span<const T> dy, std::span<T> dx, std::span<T> dw,
                     std::span<T> db) {
  const int out_len = g.conv_out_len();
  if (!dx.empty()) std::fill(dx.begin(), dx.end(), T(0));
  for (int bi = 0; bi < g.batch; ++bi)
    for (int o = 0; o < out_len; ++o)
      for (int co = 0; co < g.out_ch; ++co) {
        const T d = dy[at3(bi, o, co, out_len, g.out_ch)];
        if (!db.empty()) db[co] += d;
        for (int j = 0; j < g.kernel; ++j) {
          const int pos = o * g.stride - g.pad + j;
          if (pos < 0 || pos >= g.in_len) continue;
          for (int ci = 0; ci < g.in_ch; ++ci) {
            const std::size_t wi = static_cast<std::size_t>(j * g.in_ch + ci) * g.out_ch + co;
            const std::size_t xi = at3(bi, pos, ci, g.in_len, g.in_ch);
            if (!dw.empty()) dw[wi] += d * x[xi];
            if (!dx.empty()) dx[xi] += d * w[wi];
          }
        }
      }
}

template <typename T>
void conv_transpose1d_forward(const ConvGeometry& g, std::span<const T> x,
                              std::span<const T> w, std::span<const T> b, std::span<T> y) {
  const int out_len = g.transpose_out_len();
  const std::size_t kc = static_cast<std::size_t>(g.kernel) * g.out_ch;
  for (int bi = 0; bi < g.batch; ++bi)
    for (int o = 0; o < out_len; ++o)
      for (int co = 0; co < g.out_ch; ++co) y[at3(bi, o, co, out_len, g.out_ch)] = b[co];
  for (int bi = 0; bi < g.batch; ++bi)
    for (int i = 0; i < g.in_len; ++i)
      for (int j = 0; j < g.kernel; ++j) {
        const int pos = i * g.stride - g.pad + j;
        if (pos < 0 || pos >= out_len) continue;
        for (int ci = 0; ci < g.in_ch; ++ci)
          for (int co = 0; co < g.out_ch; ++co)
            y[at3(bi, pos, co, out_len, g.out_ch)] +=
                x[at3(bi, i, ci, g.in_len, g.in_ch)] * w[ci * kc + j * g.out_ch + co];
      }
}

template <typename T>
void conv_transpose1d_backward(const ConvGeometry& g, std::span<const T> x,
                               std::span<const T> w, std::span<const T> dy, std::span<T> dx,
                               std::span<T> dw, std::span<T> db) {
  const int out_len = g.transpose_out_len();
  const std::size_t kc = static_cast<std::size_t>(g.kernel) * g.out_ch;
  if (!dx.empty()) std::fill(dx.begin(), dx.end(), T(0));
  if (!db.empty())
    for (int bi = 0; bi < g.batch; ++bi)
      for (int o = 0; o < out_len; ++o)
        for (int co = 0; co < g.out_ch; ++co) db[co] += dy[at3(bi, o, co, out_len, g.out_ch)];
  for (int bi = 0; bi < g.batch; ++bi)
    for (int i = 0; i < g.in_len; ++i)
      for (int j = 0; j < g.kernel; ++j) {
        const int pos = i * g.stride - g.pad + j;
        if (pos < 0 || pos >= out_len) continue;
        for (int ci = 0; ci < g.in_ch; ++ci)
          for (int co = 0; co < g.out_ch; ++co) {
            const T d = dy[at3(bi, pos, co, out_len, g.out_ch)];
            const std::size_t wi = ci * kc + j * g.out_ch + co;
            const std::size_t xi = at3(bi, i, ci, g.in_len, g.in_ch);
            if (!dw.empty()) dw[wi] += d * x[xi];
            if (!dx.empty()) dx[xi] += d * w[wi];
          }
      }
}

template <typename T>
void depthwise_forward(int batch, int len, int ch, int kernel, int pad, std::span<const T> x,
                       std::span<const T> w, std::span<const T> b, std::span<T> y) {
  for (int bi = 0; bi < batch; ++bi)
    for (int l = 0; l < len; ++l)
      for (int c = 0; c < ch; ++c) {
        T acc = b[c];
        for (int j = 0; j < kernel; ++j) {
          const int pos = l + j - pad;
          if (pos >= 0 && pos < len) acc += w[j * ch + c] * x[at3(bi, pos, c, len, ch)];
        }
        y[at3(bi, l, c, len, ch)] = acc;
      }
}

template <typename T>
void depthwise_backward(int batch, int len, int ch, int kernel, int pad, std::span<const T> x,
                        std::span<const T> w, std::span<const T> dy, std::span<T> dx,
                        std::span<T> dw, std::span<T> db) {
  if (!dx.empty()) std::fill(dx.begin(), dx.end(), T(0));
  for (int bi = 0; bi < batch; ++bi)
    for (int l = 0; l < len; ++l)
      for (int c = 0; c < ch; ++c) {
        const T d = dy[at3(bi, l, c, len, ch)];
        if (!db.empty()) db[c] += d;
        for (int j = 0; j < kernel; ++j) {
          const int pos = l + j - pad;
          if (pos < 0 || pos >= len) continue;
          if (!dw.empty()) dw[j * ch + c] += d * x[at3(bi, pos, c, len, ch)];
          if (!dx.empty()) dx[at3(bi, pos, c, len, ch)] += d * w[j * ch + c];
        }
      }
}

template <typename T>
void layernorm_forward(int rows, int ch, T eps, std::span<const T> x, std::span<const T> gamma,
                       std::span<const T> beta, std::span<T> y, std::span<T> xhat,
                       std::span<T> rstd) {
  for (int r = 0; r < rows; ++r) {
    const std::size_t o = static_cast<std::size_t>(r) * ch;
    T mean = 0;
    for (int c = 0; c < ch; ++c) mean += x[o + c];
    mean /= ch;
    T var = 0;
    for (int c = 0; c < ch; ++c) var += (x[o + c] - mean) * (x[o + c] - mean);
    var /= ch;
    rstd[r] = T(1) / std::sqrt(var + eps);
    for (int c = 0; c < ch; ++c) {
      xhat[o + c] = (x[o + c] - mean) * rstd[r];
      y[o + c] = gamma[c] * xhat[o + c] + beta[c];
    }
  }
}

template <typename T>
void layernorm_backward(int rows, int ch, std::span<const T> xhat, std::span<const T> rstd,
                        std::span<const T> gamma, std::span<const T> dy, std::span<T> dx,
                        std::span<T> dgamma, std::span<T> dbeta) {
  for (int r = 0; r < rows; ++r) {
    const std::size_t o = static_cast<std::size_t>(r) * ch;
    T sum_d = 0, sum_dh = 0;
    for (int c = 0; c < ch; ++c) {
      sum_d += dy[o + c] * gamma[c];
      sum_dh += dy[o + c] * gamma[c] * xhat[o + c];
      if (!dgamma.empty()) {
        dgamma[c] += dy[o + c] * xhat[o + c];
        dbeta[c] += dy[o + c];
      }
    }
    if (dx.empty()) continue;
    for (int c = 0; c < ch; ++c)
      dx[o + c] = rstd[r] * (dy[o + c] * gamma[c] - sum_d / ch - xhat[o + c] * sum_dh / ch);
  }
}

template <typename T>
void linear_forward(int rows, int in, int out, std::span<const T> x, std::span<const T> w,
                    std::span<const T> b, std::span<T> y) {
  for (int r = 0; r < rows; ++r)
    for (int o = 0; o < out; ++o) {
      T acc = b[o];
      for (int i = 0; i < in; ++i)
        acc += x[static_cast<std::size_t>(r) * in + i] * w[static_cast<std::size_t>(i) * out + o];
      y[static_cast<std::size_t>(r) * out + o] = acc;
    }
}

template <typename T>
void linear_backward(int rows, int in, int out, std::span<const T> x, std::span<const T> w,
                     std::span<const T> dy, std::span<T> dx, std::span<T> dw,
                     std::span<T> db) {
  if (!dx.empty()) std::fill(dx.begin(), dx.end(), T(0));
  for (int r = 0; r < rows; ++r)
    for (int o = 0; o < out; ++o) {
      const T d = dy[static_cast<std::size_t>(r) * out + o];
      if (!db.empty()) db[o] += d;
      for (int i = 0; i < in; ++i) {
        const std::size_t wi = static_cast<std::size_t>(i) * out + o;
        const std::size_t xi = static_cast<std::size_t>(r) * in + i;
        if (!dw.empty()) dw[wi] += d * x[xi];
        if (!dx.empty()) dx[xi] += d * w[wi];
      }
    }
}

template <typename T>
void gelu_forward(std::span<const T> x, std::span<T> y) {
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] = T(0.5) * x[i] * (T(1) + std::erf(x[i] / std::numbers::sqrt2_v<T>));
}

template <typename T>
void gelu_backward(std::span<const T> x, std::span<const T> dy, std::span<T> dx) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T cdf = T(0.5) * (T(1) + std::erf(x[i] / std::numbers::sqrt2_v<T>));
    const T pdf = std::exp(T(-0.5) * x[i] * x[i]) /
                  std::sqrt(T(2) * std::numbers::pi_v<T>);
    dx[i] = dy[i] * (cdf + x[i] * pdf);
  }
}

JAMLOC_INSTANTIATE_KERNELS(float)
JAMLOC_INSTANTIATE_KERNELS(double)

}  // namespace jamloc::kernels::serial
