#include "gcs/dense.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "gcs/kernels.hpp"

namespace gcs {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows_ * cols_ != data_.size()) {
    throw std::invalid_argument("DenseMatrix: rows*cols != data length");
  }
}

void DenseMatrix::set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

bool DenseMatrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

namespace {
void check_inner(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("matmul: inner dimension mismatch");
}
}  // namespace

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner(a.cols(), b.rows());
  DenseMatrix c(a.rows(), b.cols());
  kernels::active().gemm_nn(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
  return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner(a.rows(), b.rows());
  DenseMatrix c(a.cols(), b.cols());
  kernels::active().gemm_tn(a.data(), b.data(), c.data(), a.cols(), a.rows(), b.cols());
  return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner(a.cols(), b.cols());
  DenseMatrix c(a.rows(), b.rows());
  kernels::active().gemm_nt(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.rows());
  return c;
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  }
  return t;
}

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c = a;
  add_in_place(c, b);
  return c;
}

DenseMatrix sub(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c = a;
  add_in_place(c, b, -1.0);
  return c;
}

void add_in_place(DenseMatrix& a, const DenseMatrix& b, double scale) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("add: shape mismatch");
  }
  kernels::active().axpy(scale, b.data(), a.data(), a.size());
}

double frobenius_norm(const DenseMatrix& a) {
  return std::sqrt(kernels::active().dot(a.data(), a.data(), a.size()));
}

double max_abs(const DenseMatrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a.data()[i]));
  return m;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
  }
  return m;
}

DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, unsigned long long seed,
                            double mean, double stddev) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(mean, stddev);
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

DenseMatrix random_orthonormal(std::size_t rows, std::size_t cols, unsigned long long seed) {
  if (cols > rows) throw std::invalid_argument("random_orthonormal: cols > rows");
  DenseMatrix g = gaussian_matrix(rows, cols, seed);
  // Modified Gram-Schmidt, column by column.
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t p = 0; p < j; ++p) {
      double proj = 0.0;
      for (std::size_t i = 0; i < rows; ++i) proj += g(i, p) * g(i, j);
      for (std::size_t i = 0; i < rows; ++i) g(i, j) -= proj * g(i, p);
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < rows; ++i) norm += g(i, j) * g(i, j);
    norm = std::sqrt(norm);
    if (norm < 1e-12) throw std::runtime_error("random_orthonormal: rank deficient draw");
    for (std::size_t i = 0; i < rows; ++i) g(i, j) /= norm;
  }
  return g;
}

}  // namespace gcs
