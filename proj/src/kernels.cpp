#include "jamloc/kernels.hpp"

#include "kernel_instantiation.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <vector>

namespace jamloc::kernels {
namespace {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using RowVec = Eigen::Matrix<T, 1, Eigen::Dynamic>;

template <typename T>
Eigen::Map<const Mat<T>> cmap(std::span<const T> s, int rows, int cols) {
  return Eigen::Map<const Mat<T>>(s.data(), rows, cols);
}
template <typename T>
Eigen::Map<Mat<T>> map(std::span<T> s, int rows, int cols) {
  return Eigen::Map<Mat<T>>(s.data(), rows, cols);
}
template <typename T>
Eigen::Map<Mat<T>> map(std::vector<T>& v, int rows, int cols) {
  return Eigen::Map<Mat<T>>(v.data(), rows, cols);
}

// acc[c] += sum_r a[r, c] (times b[r, c] when given), rows in order so the
// result does not depend on buffer alignment.
template <typename T>
void add_column_sums(const T* a, const T* b, int rows, int cols, T* acc) {
  for (int r = 0; r < rows; ++r) {
    const T* ar = a + static_cast<std::size_t>(r) * cols;
    if (b) {
      const T* br = b + static_cast<std::size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) acc[c] += ar[c] * br[c];
    } else {
      for (int c = 0; c < cols; ++c) acc[c] += ar[c];
    }
  }
}

// cols[(b * out_len + o), j * in_ch + ci] = x[b, o * stride - pad + j, ci]
template <typename T>
void im2col(const ConvGeometry& g, int out_len, std::span<const T> x, std::vector<T>& cols) {
  const int kc = g.kernel * g.in_ch;
  cols.assign(static_cast<std::size_t>(g.batch) * out_len * kc, T(0));
#pragma omp parallel for schedule(static)
  for (int b = 0; b < g.batch; ++b) {
    for (int o = 0; o < out_len; ++o) {
      T* dst = cols.data() + (static_cast<std::size_t>(b) * out_len + o) * kc;
      for (int j = 0; j < g.kernel; ++j) {
        const int pos = o * g.stride - g.pad + j;
        if (pos < 0 || pos >= g.in_len) continue;
        const T* src = x.data() + (static_cast<std::size_t>(b) * g.in_len + pos) * g.in_ch;
        std::copy(src, src + g.in_ch, dst + j * g.in_ch);
      }
    }
  }
}

template <typename T>
void col2im(const ConvGeometry& g, int out_len, const std::vector<T>& cols, std::span<T> dx) {
  const int kc = g.kernel * g.in_ch;
  std::fill(dx.begin(), dx.end(), T(0));
#pragma omp parallel for schedule(static)
  for (int b = 0; b < g.batch; ++b) {
    for (int o = 0; o < out_len; ++o) {
      const T* src = cols.data() + (static_cast<std::size_t>(b) * out_len + o) * kc;
      for (int j = 0; j < g.kernel; ++j) {
        const int pos = o * g.stride - g.pad + j;
        if (pos < 0 || pos >= g.in_len) continue;
        T* d = dx.data() + (static_cast<std::size_t>(b) * g.in_len + pos) * g.in_ch;
        for (int c = 0; c < g.in_ch; ++c) d[c] += src[j * g.in_ch + c];
      }
    }
  }
}

}  // namespace

template <typename T>
void conv1d_forward(const ConvGeometry& g, std::span<const T> x, std::span<const T> w,
                    std::span<const T> b, std::span<T> y) {
  const int out_len = g.conv_out_len();
  const int rows = g.batch * out_len;
  const int kc = g.kernel * g.in_ch;
  std::vector<T> cols;
  im2col(g, out_len, x, cols);
  auto Y = map(y, rows, g.out_ch);
  Y.noalias() = map(cols, rows, kc) * cmap(w, kc, g.out_ch);
  Y.rowwise() += Eigen::Map<const RowVec<T>>(b.data(), g.out_ch);
}

template <typename T>
void conv1d_backward(const ConvGeometry& g, std::span<const T> x, std::span<const T> w,
                     std::span<const T> dy, std::span<T> dx, std::span<T> dw,
                     std::span<T> db) {
  const int out_len = g.conv_out_len();
  const int rows = g.batch * out_len;
  const int kc = g.kernel * g.in_ch;
  const auto DY = cmap(dy, rows, g.out_ch);
  std::vector<T> cols;
  if (!dw.empty()) {
    im2col(g, out_len, x, cols);
    map(dw, kc, g.out_ch).noalias() += map(cols, rows, kc).transpose() * DY;
  }
  if (!db.empty()) add_column_sums<T>(DY.data(), nullptr, static_cast<int>(DY.rows()), g.out_ch, db.data());
  if (!dx.empty()) {
    cols.resize(static_cast<std::size_t>(rows) * kc);
    map(cols, rows, kc).noalias() = DY * cmap(w, kc, g.out_ch).transpose();
    col2im(g, out_len, cols, dx);
  }
}

template <typename T>
void conv_transpose1d_forward(const ConvGeometry& g, std::span<const T> x,
                              std::span<const T> w, std::span<const T> b, std::span<T> y) {
  const int out_len = g.transpose_out_len();
  const int kc = g.kernel * g.out_ch;
  const int rows = g.batch * g.in_len;
  std::vector<T> z(static_cast<std::size_t>(rows) * kc);
  map(z, rows, kc).noalias() = cmap(x, rows, g.in_ch) * cmap(w, g.in_ch, kc);
#pragma omp parallel for schedule(static)
  for (int bi = 0; bi < g.batch; ++bi) {
    T* yb = y.data() + static_cast<std::size_t>(bi) * out_len * g.out_ch;
    for (int o = 0; o < out_len; ++o)
      for (int c = 0; c < g.out_ch; ++c) yb[o * g.out_ch + c] = b[c];
    for (int i = 0; i < g.in_len; ++i) {
      const T* zr = z.data() + (static_cast<std::size_t>(bi) * g.in_len + i) * kc;
      for (int j = 0; j < g.kernel; ++j) {
        const int pos = i * g.stride - g.pad + j;
        if (pos < 0 || pos >= out_len) continue;
        T* d = yb + pos * g.out_ch;
        for (int c = 0; c < g.out_ch; ++c) d[c] += zr[j * g.out_ch + c];
      }
    }
  }
}

template <typename T>
void conv_transpose1d_backward(const ConvGeometry& g, std::span<const T> x,
                               std::span<const T> w, std::span<const T> dy, std::span<T> dx,
                               std::span<T> dw, std::span<T> db) {
  const int out_len = g.transpose_out_len();
  const int kc = g.kernel * g.out_ch;
  const int rows = g.batch * g.in_len;
  std::vector<T> dz(static_cast<std::size_t>(rows) * kc, T(0));
#pragma omp parallel for schedule(static)
  for (int bi = 0; bi < g.batch; ++bi) {
    const T* dyb = dy.data() + static_cast<std::size_t>(bi) * out_len * g.out_ch;
    for (int i = 0; i < g.in_len; ++i) {
      T* dzr = dz.data() + (static_cast<std::size_t>(bi) * g.in_len + i) * kc;
      for (int j = 0; j < g.kernel; ++j) {
        const int pos = i * g.stride - g.pad + j;
        if (pos < 0 || pos >= out_len) continue;
        std::copy(dyb + pos * g.out_ch, dyb + (pos + 1) * g.out_ch, dzr + j * g.out_ch);
      }
    }
  }
  const auto DZ = map(dz, rows, kc);
  if (!dw.empty()) map(dw, g.in_ch, kc).noalias() += cmap(x, rows, g.in_ch).transpose() * DZ;
  if (!db.empty())
    add_column_sums<T>(dy.data(), nullptr, g.batch * out_len, g.out_ch, db.data());
  if (!dx.empty()) map(dx, rows, g.in_ch).noalias() = DZ * cmap(w, g.in_ch, kc).transpose();
}

template <typename T>
void depthwise_forward(int batch, int len, int ch, int kernel, int pad, std::span<const T> x,
                       std::span<const T> w, std::span<const T> b, std::span<T> y) {
#pragma omp parallel for schedule(static)
  for (int bi = 0; bi < batch; ++bi) {
    const T* xb = x.data() + static_cast<std::size_t>(bi) * len * ch;
    T* yb = y.data() + static_cast<std::size_t>(bi) * len * ch;
    for (int l = 0; l < len; ++l) {
      T* yr = yb + l * ch;
      for (int c = 0; c < ch; ++c) yr[c] = b[c];
      for (int j = 0; j < kernel; ++j) {
        const int pos = l + j - pad;
        if (pos < 0 || pos >= len) continue;
        const T* xr = xb + pos * ch;
        const T* wr = w.data() + j * ch;
        for (int c = 0; c < ch; ++c) yr[c] += wr[c] * xr[c];
      }
    }
  }
}

template <typename T>
void depthwise_backward(int batch, int len, int ch, int kernel, int pad, std::span<const T> x,
                        std::span<const T> w, std::span<const T> dy, std::span<T> dx,
                        std::span<T> dw, std::span<T> db) {
  if (!dx.empty()) {
#pragma omp parallel for schedule(static)
    for (int bi = 0; bi < batch; ++bi) {
      const T* dyb = dy.data() + static_cast<std::size_t>(bi) * len * ch;
      T* dxb = dx.data() + static_cast<std::size_t>(bi) * len * ch;
      std::fill(dxb, dxb + static_cast<std::size_t>(len) * ch, T(0));
      for (int l = 0; l < len; ++l) {
        const T* dyr = dyb + l * ch;
        for (int j = 0; j < kernel; ++j) {
          const int pos = l + j - pad;
          if (pos < 0 || pos >= len) continue;
          T* dxr = dxb + pos * ch;
          const T* wr = w.data() + j * ch;
          for (int c = 0; c < ch; ++c) dxr[c] += wr[c] * dyr[c];
        }
      }
    }
  }
  // Parameter reductions stay serial so the summation order is fixed.
  if (!dw.empty()) {
    for (int bi = 0; bi < batch; ++bi) {
      const T* xb = x.data() + static_cast<std::size_t>(bi) * len * ch;
      const T* dyb = dy.data() + static_cast<std::size_t>(bi) * len * ch;
      for (int l = 0; l < len; ++l) {
        const T* dyr = dyb + l * ch;
        for (int j = 0; j < kernel; ++j) {
          const int pos = l + j - pad;
          if (pos < 0 || pos >= len) continue;
          const T* xr = xb + pos * ch;
          T* dwr = dw.data() + j * ch;
          for (int c = 0; c < ch; ++c) dwr[c] += dyr[c] * xr[c];
        }
      }
    }
  }
  if (!db.empty()) add_column_sums<T>(dy.data(), nullptr, batch * len, ch, db.data());
}

template <typename T>
void layernorm_forward(int rows, int ch, T eps, std::span<const T> x, std::span<const T> gamma,
                       std::span<const T> beta, std::span<T> y, std::span<T> xhat,
                       std::span<T> rstd) {
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    const T* xr = x.data() + static_cast<std::size_t>(r) * ch;
    T* yr = y.data() + static_cast<std::size_t>(r) * ch;
    T* hr = xhat.data() + static_cast<std::size_t>(r) * ch;
    T mean = 0;
    for (int c = 0; c < ch; ++c) mean += xr[c];
    mean /= ch;
    T var = 0;
    for (int c = 0; c < ch; ++c) var += (xr[c] - mean) * (xr[c] - mean);
    var /= ch;
    const T rs = T(1) / std::sqrt(var + eps);
    rstd[r] = rs;
    for (int c = 0; c < ch; ++c) {
      hr[c] = (xr[c] - mean) * rs;
      yr[c] = gamma[c] * hr[c] + beta[c];
    }
  }
}

template <typename T>
void layernorm_backward(int rows, int ch, std::span<const T> xhat, std::span<const T> rstd,
                        std::span<const T> gamma, std::span<const T> dy, std::span<T> dx,
                        std::span<T> dgamma, std::span<T> dbeta) {
  if (!dx.empty()) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < rows; ++r) {
      const T* hr = xhat.data() + static_cast<std::size_t>(r) * ch;
      const T* dyr = dy.data() + static_cast<std::size_t>(r) * ch;
      T* dxr = dx.data() + static_cast<std::size_t>(r) * ch;
      T mean_d = 0, mean_dh = 0;
      for (int c = 0; c < ch; ++c) {
        const T d = dyr[c] * gamma[c];
        mean_d += d;
        mean_dh += d * hr[c];
      }
      mean_d /= ch;
      mean_dh /= ch;
      for (int c = 0; c < ch; ++c)
        dxr[c] = rstd[r] * (dyr[c] * gamma[c] - mean_d - hr[c] * mean_dh);
    }
  }
  if (!dgamma.empty()) {
    add_column_sums<T>(xhat.data(), dy.data(), rows, ch, dgamma.data());
    add_column_sums<T>(dy.data(), nullptr, rows, ch, dbeta.data());
  }
}

template <typename T>
void linear_forward(int rows, int in, int out, std::span<const T> x, std::span<const T> w,
                    std::span<const T> b, std::span<T> y) {
  auto Y = map(y, rows, out);
  Y.noalias() = cmap(x, rows, in) * cmap(w, in, out);
  Y.rowwise() += Eigen::Map<const RowVec<T>>(b.data(), out);
}

template <typename T>
void linear_backward(int rows, int in, int out, std::span<const T> x, std::span<const T> w,
                     std::span<const T> dy, std::span<T> dx, std::span<T> dw,
                     std::span<T> db) {
  const auto DY = cmap(dy, rows, out);
  if (!dw.empty()) map(dw, in, out).noalias() += cmap(x, rows, in).transpose() * DY;
  if (!db.empty()) add_column_sums<T>(DY.data(), nullptr, static_cast<int>(DY.rows()), out, db.data());
  if (!dx.empty()) map(dx, rows, in).noalias() = DY * cmap(w, in, out).transpose();
}

template <typename T>
void gelu_forward(std::span<const T> x, std::span<T> y) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  const T inv_sqrt2 = T(1) / std::numbers::sqrt2_v<T>;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    y[i] = T(0.5) * x[i] * (T(1) + std::erf(x[i] * inv_sqrt2));
}

template <typename T>
void gelu_backward(std::span<const T> x, std::span<const T> dy, std::span<T> dx) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  const T inv_sqrt2 = T(1) / std::numbers::sqrt2_v<T>;
  const T inv_sqrt2pi = std::numbers::inv_sqrtpi_v<T> * inv_sqrt2;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const T cdf = T(0.5) * (T(1) + std::erf(x[i] * inv_sqrt2));
    const T pdf = inv_sqrt2pi * std::exp(T(-0.5) * x[i] * x[i]);
    dx[i] = dy[i] * (cdf + x[i] * pdf);
  }
}

JAMLOC_INSTANTIATE_KERNELS(float)
JAMLOC_INSTANTIATE_KERNELS(double)

}  // namespace jamloc::kernels
