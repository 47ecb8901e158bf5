#include "jamloc/uda.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace jamloc {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMat> view(const Tensor<double>& x) {
  if (x.rank() != 2) throw std::invalid_argument("expected a 2-D feature matrix");
  return {x.data(), x.dim(0), x.dim(1)};
}

// Symmetric matrix power via eigendecomposition; p = 0.5 or -0.5.
Eigen::MatrixXd sym_power(const Eigen::MatrixXd& c, double p, const char* which) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  const auto& ev = es.eigenvalues();
  const double hi = ev.maxCoeff(), lo = ev.minCoeff();
  const double tol = 1e-12 * std::max(1.0, std::abs(hi));
  if (lo <= (p < 0 ? tol : -tol)) {
    std::ostringstream os;
    os << which << " covariance is not positive definite after shrinkage (condition number "
       << (lo > 0 ? hi / lo : INFINITY) << ")";
    throw std::runtime_error(os.str());
  }
  Eigen::VectorXd d = ev.cwiseMax(0.0).array().pow(p);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

Eigen::MatrixXd covariance(const Tensor<double>& x) {
  const auto m = view(x);
  if (m.rows() < 2) throw std::invalid_argument("covariance needs at least two rows");
  const Eigen::RowVectorXd mean = m.colwise().mean();
  const Eigen::MatrixXd centered = m.rowwise() - mean;
  Eigen::MatrixXd c = centered.transpose() * centered / static_cast<double>(m.rows() - 1);
  return (c + c.transpose()) / 2.0;
}

AlignmentStats coral_fit(const Tensor<double>& source, const Tensor<double>& target,
                         double shrinkage) {
  if (shrinkage < 0) throw std::invalid_argument("coral: negative shrinkage");
  const auto s = view(source);
  const auto t = view(target);
  if (s.cols() != t.cols()) throw std::invalid_argument("coral: feature widths differ");
  const long d = s.cols();
  if (shrinkage == 0 && (s.rows() <= d || t.rows() <= d))
    throw std::invalid_argument("coral: need more samples than features or a positive shrinkage");
  AlignmentStats st;
  st.shrinkage = shrinkage;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
  st.source_cov = covariance(source) + shrinkage * eye;
  st.target_cov = covariance(target) + shrinkage * eye;
  st.source_mean = s.colwise().mean();
  st.target_mean = t.colwise().mean();
  st.transform = sym_power(st.source_cov, -0.5, "source") * sym_power(st.target_cov, 0.5, "target");
  if (!st.transform.allFinite()) throw std::runtime_error("coral: non-finite transform");
  return st;
}

Tensor<double> coral_apply(const AlignmentStats& st, const Tensor<double>& x) {
  const auto m = view(x);
  if (m.cols() != st.transform.rows()) throw std::invalid_argument("coral: width mismatch");
  RowMat out = ((m.rowwise() - st.source_mean) * st.transform).rowwise() + st.target_mean;
  return Tensor<double>({x.dim(0), x.dim(1)}, std::vector<double>(out.data(), out.data() + out.size()));
}

Tensor<double> coral_transform(const Tensor<double>& source, const Tensor<double>& target,
                               double shrinkage) {
  return coral_apply(coral_fit(source, target, shrinkage), source);
}

namespace {

// Mean kernel value and, optionally, its gradient w.r.t. the rows of a.
double kernel_mean(const RowMat& a, const RowMat& b, double h, RowMat* grad_a, RowMat* grad_b) {
  const double inv = 1.0 / (2.0 * h * h);
  const double norm = 1.0 / (static_cast<double>(a.rows()) * static_cast<double>(b.rows()));
  const Eigen::VectorXd an = a.rowwise().squaredNorm();
  const Eigen::VectorXd bn = b.rowwise().squaredNorm();
  RowMat d2 = (-2.0 * a * b.transpose()).colwise() + an;
  d2.rowwise() += bn.transpose();
  const RowMat k = (-(d2.cwiseMax(0.0)) * inv).array().exp().matrix();
  if (grad_a) {
    // d k(a_i, b_j) / d a_i = -k (a_i - b_j) / h^2
    const Eigen::VectorXd ksum = k.rowwise().sum();
    *grad_a = (-(ksum.asDiagonal() * a) + k * b) * (2.0 * inv * norm);
  }
  if (grad_b) {
    const Eigen::VectorXd ksum = k.colwise().sum().transpose();
    *grad_b = (-(ksum.asDiagonal() * b) + k.transpose() * a) * (2.0 * inv * norm);
  }
  return k.sum() * norm;
}

Tensor<double> to_tensor(const RowMat& m) {
  return Tensor<double>({static_cast<int>(m.rows()), static_cast<int>(m.cols())},
                        std::vector<double>(m.data(), m.data() + m.size()));
}

}  // namespace

MmdGrad mmd_with_grad(const Tensor<double>& x, const Tensor<double>& y, double h) {
  if (!(h > 0)) throw std::invalid_argument("mmd: bandwidth must be positive");
  const RowMat a = view(x), b = view(y);
  if (a.rows() < 1 || b.rows() < 1) throw std::invalid_argument("mmd: empty sample");
  if (a.cols() != b.cols()) throw std::invalid_argument("mmd: feature widths differ");
  RowMat gxx1, gxx2, gyy1, gyy2, gxy_x, gxy_y;
  const double kxx = kernel_mean(a, a, h, &gxx1, &gxx2);
  const double kyy = kernel_mean(b, b, h, &gyy1, &gyy2);
  const double kxy = kernel_mean(a, b, h, &gxy_x, &gxy_y);
  MmdGrad g;
  g.value = std::max(0.0, kxx + kyy - 2.0 * kxy);
  g.dx = to_tensor(gxx1 + gxx2 - 2.0 * gxy_x);
  g.dy = to_tensor(gyy1 + gyy2 - 2.0 * gxy_y);
  return g;
}

double mmd(const Tensor<double>& x, const Tensor<double>& y, double h) {
  if (!(h > 0)) throw std::invalid_argument("mmd: bandwidth must be positive");
  const RowMat a = view(x), b = view(y);
  if (a.rows() < 1 || b.rows() < 1) throw std::invalid_argument("mmd: empty sample");
  if (a.cols() != b.cols()) throw std::invalid_argument("mmd: feature widths differ");
  const double v = kernel_mean(a, a, h, nullptr, nullptr) + kernel_mean(b, b, h, nullptr, nullptr) -
                   2.0 * kernel_mean(a, b, h, nullptr, nullptr);
  return std::max(0.0, v);
}

double median_bandwidth(const Tensor<double>& x, const Tensor<double>& y, int max_points) {
  const auto a = view(x), b = view(y);
  RowMat pool(std::min<long>(a.rows(), max_points) + std::min<long>(b.rows(), max_points), a.cols());
  const long na = std::min<long>(a.rows(), max_points);
  pool.topRows(na) = a.topRows(na);
  pool.bottomRows(pool.rows() - na) = b.topRows(pool.rows() - na);
  std::vector<double> d;
  for (long i = 0; i < pool.rows(); ++i)
    for (long j = i + 1; j < pool.rows(); ++j) d.push_back((pool.row(i) - pool.row(j)).norm());
  if (d.empty()) return 1.0;
  std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
  const double med = d[d.size() / 2];
  return med > 0 ? med : 1.0;
}

}  // namespace jamloc
