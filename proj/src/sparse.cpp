#include "gcs/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "gcs/kernels.hpp"

namespace gcs {

SparseMatrix::SparseMatrix(std::size_t n, std::vector<std::size_t> row_ptr,
                           std::vector<std::size_t> col, std::vector<double> val)
    : n_(n), row_ptr_(std::move(row_ptr)), col_(std::move(col)), val_(std::move(val)) {
  if (row_ptr_.size() != n_ + 1 || col_.size() != val_.size() || row_ptr_.back() != col_.size()) {
    throw std::invalid_argument("SparseMatrix: inconsistent CSR arrays");
  }
}

SparseMatrix SparseMatrix::from_triplets(
    std::size_t n, std::vector<std::tuple<std::size_t, std::size_t, double>> triplets) {
  std::sort(triplets.begin(), triplets.end(),
            [](const auto& a, const auto& b) {
              return std::tie(std::get<0>(a), std::get<1>(a)) <
                     std::tie(std::get<0>(b), std::get<1>(b));
            });
  SparseMatrix m;
  m.n_ = n;
  m.row_ptr_.assign(n + 1, 0);
  for (std::size_t t = 0; t < triplets.size();) {
    auto [i, j, v] = triplets[t];
    if (i >= n || j >= n) throw std::out_of_range("from_triplets: index out of range");
    double sum = v;
    std::size_t u = t + 1;
    while (u < triplets.size() && std::get<0>(triplets[u]) == i && std::get<1>(triplets[u]) == j) {
      sum += std::get<2>(triplets[u]);
      ++u;
    }
    m.col_.push_back(j);
    m.val_.push_back(sum);
    ++m.row_ptr_[i + 1];
    t = u;
  }
  for (std::size_t i = 0; i < n; ++i) m.row_ptr_[i + 1] += m.row_ptr_[i];
  return m;
}

double SparseMatrix::coeff(std::size_t i, std::size_t j) const {
  const auto begin = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
  const auto end = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
  const auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return 0.0;
  return val_[static_cast<std::size_t>(it - col_.begin())];
}

double SparseMatrix::row_sum(std::size_t i) const {
  double s = 0.0;
  for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += val_[p];
  return s;
}

bool SparseMatrix::is_symmetric(double tol) const {
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      if (std::fabs(val_[p] - coeff(col_[p], i)) > tol) return false;
    }
  }
  return true;
}

std::vector<double> SparseMatrix::multiply(const std::vector<double>& x) const {
  if (x.size() != n_) throw std::invalid_argument("spmv: dimension mismatch");
  std::vector<double> y(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += val_[p] * x[col_[p]];
    y[i] = s;
  }
  return y;
}

DenseMatrix SparseMatrix::multiply(const DenseMatrix& x) const {
  if (x.rows() != n_) throw std::invalid_argument("spmm: dimension mismatch");
  DenseMatrix y(n_, x.cols());
  const auto& axpy = kernels::active().axpy;
  for (std::size_t i = 0; i < n_; ++i) {
    double* yrow = y.row(i);
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      axpy(val_[p], x.row(col_[p]), yrow, x.cols());
    }
  }
  return y;
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix d(n_, n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) d(i, col_[p]) = val_[p];
  }
  return d;
}

}  // namespace gcs
