#pragma once

#include <cstddef>
#include <vector>

#include "gcs/dense.hpp"

namespace gcs {

// Square sparse matrix in compressed row form with sorted column indices.
// All matrices built here are symmetric (adjacency, Laplacian, propagation).
class SparseMatrix {
 public:
  SparseMatrix() = default;
  explicit SparseMatrix(std::size_t n) : n_(n), row_ptr_(n + 1, 0) {}
  SparseMatrix(std::size_t n, std::vector<std::size_t> row_ptr,
               std::vector<std::size_t> col, std::vector<double> val);

  // Builds from (i, j, v) triplets; duplicates are summed, rows sorted.
  static SparseMatrix from_triplets(
      std::size_t n, std::vector<std::tuple<std::size_t, std::size_t, double>> triplets);

  std::size_t size() const { return n_; }
  std::size_t nnz() const { return col_.size(); }

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::size_t>& col() const { return col_; }
  const std::vector<double>& val() const { return val_; }

  double coeff(std::size_t i, std::size_t j) const;  // 0 when absent
  double row_sum(std::size_t i) const;
  bool is_symmetric(double tol = 0.0) const;

  std::vector<double> multiply(const std::vector<double>& x) const;
  DenseMatrix multiply(const DenseMatrix& x) const;  // row-parallel SpMM
  DenseMatrix to_dense() const;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_;
  std::vector<double> val_;
};

}  // namespace gcs
