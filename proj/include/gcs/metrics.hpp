#pragma once

#include <cstdint>
#include <vector>

#include "gcs/dense.hpp"
#include "gcs/graph.hpp"
#include "gcs/partition.hpp"
#include "gcs/sparse.hpp"

namespace gcs {

// Numerical verification of the coarsening approximation theory.

struct ErrorReport {
  double nuclear_error = 0.0;      // ||I - V^T P P^T V||_1 = Tr(I - V^T P P^T V)
  double kmeans_cost = 0.0;        // per-cluster centroid sum, equals nuclear_error
  double spectral_error = 0.0;     // ||I - V^T P P^T V||_2
  double restricted_l_error = 0.0; // epsilon_hat in the Laplacian semi-norm
  std::size_t bound_violations = 0;
};

// V must have orthonormal columns (checked to 1e-10 unless noted).
double nuclear_error(const DenseMatrix& v, const Partition& p);
double kmeans_cost(const DenseMatrix& v, const Partition& p);
double spectral_error(const DenseMatrix& v, const Partition& p);

// Worst-case relative projection loss in the ||.||_L semi-norm over span(V),
// after deflating the Laplacian nullspace. Returns epsilon_hat (square root
// of the max generalized eigenvalue, the norm-ratio convention).
double restricted_l_error(const DenseMatrix& v, const Partition& p, const SparseMatrix& l);

// Samples y in the deflated span(V), sets x = P^T y, and counts violations of
// |y^T L y - x^T (P^T L P) x| <= 3 epsilon_hat y^T L y + 1e-10.
// epsilon_hat >= 1 makes the bound vacuous; a negative count (-1) reports it.
long epsilon_similarity_check(const SparseMatrix& l, const Partition& p, const DenseMatrix& v,
                              std::size_t samples, std::uint64_t seed);

// ||(I - (1-beta) prop) Z - beta H||_max
double fixed_point_residual(const SparseMatrix& prop, double beta, const DenseMatrix& h,
                            const DenseMatrix& z);

// Max-norm of the gradient of (1-beta) Tr(Y^T L Y) + beta ||D~^{1/2} Y - H||_F^2.
double variational_stationarity(const SparseMatrix& l, const std::vector<double>& degrees,
                                double beta, const DenseMatrix& h, const DenseMatrix& y);

struct ReducedSystemResult {
  double recurrence_vs_solve = 0.0;   // max-norm gap after the power iteration
  double stationarity = 0.0;          // reduced-objective gradient at R*
};

// Verifies the k-dimensional reduced system against the propagation
// recurrence. V is any orthonormal basis (a normalized partition matrix or a
// dense subspace basis).
ReducedSystemResult reduced_system_check(const DenseMatrix& v, const Graph& g, double beta,
                                         const DenseMatrix& f, std::size_t steps = 300);

ErrorReport error_report(const DenseMatrix& v, const Partition& p, const SparseMatrix& l,
                         std::size_t samples = 1000, std::uint64_t seed = 0);

}  // namespace gcs
