#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "gcs/dense.hpp"
#include "gcs/sparse.hpp"

namespace gcs {

struct EigenPairs {
  std::vector<double> values;  // ascending
  DenseMatrix vectors;         // n x k, orthonormal columns
};

// Smallest-k eigenpairs of a symmetric sparse matrix. Dense decomposition
// up to n = 4000, Lanczos with full reorthogonalization above that.
EigenPairs eigen_smallest_k(const SparseMatrix& s, std::size_t k);

// Force the iterative path (test hook).
EigenPairs eigen_smallest_k_lanczos(const SparseMatrix& s, std::size_t k);

}  // namespace gcs
