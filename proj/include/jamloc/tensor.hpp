#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace jamloc {

// Dense row-major tensor. Activations inside the network use a
// channels-last layout [batch, length, channels] so that pointwise
// convolutions and linear layers are plain matrix products over rows.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, T fill = T(0))
      : shape_(std::move(shape)), data_(count(shape_), fill) {}
  Tensor(std::initializer_list<int> shape, T fill = T(0))
      : Tensor(std::vector<int>(shape), fill) {}
  Tensor(std::vector<int> shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != count(shape_))
      throw std::invalid_argument("tensor data does not match shape");
  }

  const std::vector<int>& shape() const { return shape_; }
  int dim(std::size_t i) const { return shape_.at(i); }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> span() { return data_; }
  std::span<const T> span() const { return data_; }
  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T& at(int i, int j) { return data_[static_cast<std::size_t>(i) * shape_[1] + j]; }
  T at(int i, int j) const { return data_[static_cast<std::size_t>(i) * shape_[1] + j]; }
  T& at(int i, int j, int k) {
    return data_[(static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k];
  }
  T at(int i, int j, int k) const {
    return data_[(static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k];
  }

  // Rows when viewed as a matrix [prod(shape[:-1]), shape[-1]].
  int rows() const { return static_cast<int>(data_.size() / cols()); }
  int cols() const { return shape_.empty() ? 1 : shape_.back(); }

  void reshape(std::vector<int> shape) {
    if (count(shape) != data_.size())
      throw std::invalid_argument("reshape changes element count");
    shape_ = std::move(shape);
  }
  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  static std::size_t count(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
      if (d < 0) throw std::invalid_argument("negative tensor dimension");
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

  std::string shape_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(shape_[i]);
    }
    return s + "]";
  }

  template <typename U>
  Tensor<U> cast() const {
    return Tensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
  }

  bool operator==(const Tensor& o) const = default;

 private:
  std::vector<int> shape_;
  std::vector<T> data_;
};

// [B, C, L] <-> [B, L, C]
template <typename T>
Tensor<T> swap_last_two(const Tensor<T>& x) {
  if (x.rank() != 3) throw std::invalid_argument("swap_last_two expects rank 3");
  const int b = x.dim(0), m = x.dim(1), n = x.dim(2);
  Tensor<T> y({b, n, m});
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < n; ++k) y.at(i, k, j) = x.at(i, j, k);
  return y;
}

}  // namespace jamloc
