#include "gcs/eigensolve.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <stdexcept>

namespace gcs {
namespace {

constexpr std::size_t kDenseLimit = 4000;

EigenPairs dense_smallest_k(const SparseMatrix& s, std::size_t k) {
  const std::size_t n = s.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = s.row_ptr()[i]; p < s.row_ptr()[i + 1]; ++p) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s.col()[p])) = s.val()[p];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) throw std::runtime_error("dense eigensolver failed");
  EigenPairs out;
  out.values.resize(k);
  out.vectors = DenseMatrix(n, k);
  for (std::size_t j = 0; j < k; ++j) {
    out.values[j] = solver.eigenvalues()(static_cast<Eigen::Index>(j));
    for (std::size_t i = 0; i < n; ++i) {
      out.vectors(i, j) =
          solver.eigenvectors()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

double gershgorin_upper(const SparseMatrix& s) {
  double bound = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double radius = 0.0, diag = 0.0;
    for (std::size_t p = s.row_ptr()[i]; p < s.row_ptr()[i + 1]; ++p) {
      if (s.col()[p] == i) diag = s.val()[p];
      else radius += std::fabs(s.val()[p]);
    }
    bound = std::max(bound, diag + radius);
  }
  return bound;
}

}  // namespace

EigenPairs eigen_smallest_k_lanczos(const SparseMatrix& s, std::size_t k) {
  const std::size_t n = s.size();
  if (k > n) throw std::invalid_argument("eigen_smallest_k: k > n");

  // Krylov iteration on (sigma I - S) so the wanted (smallest-of-S) end of
  // the spectrum is the dominant one. The subspace is the same as Krylov(S).
  const double sigma = gershgorin_upper(s) + 1.0;
  auto apply = [&](const std::vector<double>& x) {
    std::vector<double> y = s.multiply(x);
    for (std::size_t i = 0; i < n; ++i) y[i] = sigma * x[i] - y[i];
    return y;
  };

  const std::size_t m = std::min(n, std::max<std::size_t>(2 * k + 40, 100));
  std::vector<std::vector<double>> basis;
  basis.reserve(m);

  std::mt19937_64 rng(12345);
  std::normal_distribution<double> dist;
  const auto orthonormalize = [&](std::vector<double>& w) {
    // Two MGS passes keep the basis orthonormal to machine precision.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) {
        double proj = 0.0;
        for (std::size_t i = 0; i < n; ++i) proj += w[i] * q[i];
        for (std::size_t i = 0; i < n; ++i) w[i] -= proj * q[i];
      }
    }
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-10) return false;  // (numerically) inside the span already
    for (double& x : w) x /= norm;
    return true;
  };

  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  orthonormalize(v);
  while (basis.size() < m) {
    basis.push_back(v);
    std::vector<double> w = apply(v);
    if (!orthonormalize(w)) {
      // Invariant subspace hit; restart from a fresh random direction.
      bool restarted = false;
      for (int attempt = 0; attempt < 8 && !restarted; ++attempt) {
        for (double& x : w) x = dist(rng);
        restarted = orthonormalize(w);
      }
      if (!restarted) break;
    }
    v = std::move(w);
  }

  // Rayleigh-Ritz on the explicit projection Q^T S Q: immune to the
  // breakdown noise a blind tridiagonal recurrence accumulates.
  const std::size_t steps = basis.size();
  if (steps < k) throw std::runtime_error("lanczos: subspace smaller than k");
  Eigen::MatrixXd h(static_cast<Eigen::Index>(steps), static_cast<Eigen::Index>(steps));
  std::vector<std::vector<double>> sq(steps);
  for (std::size_t j = 0; j < steps; ++j) sq[j] = s.multiply(basis[j]);
  for (std::size_t a = 0; a < steps; ++a) {
    for (std::size_t b = a; b < steps; ++b) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += basis[a][i] * sq[b][i];
      h(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = dot;
      h(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = dot;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success) throw std::runtime_error("rayleigh-ritz solve failed");

  EigenPairs out;
  out.values.resize(k);
  out.vectors = DenseMatrix(n, k);
  for (std::size_t j = 0; j < k; ++j) {
    out.values[j] = solver.eigenvalues()(static_cast<Eigen::Index>(j));
    for (std::size_t i = 0; i < n; ++i) {
      double x = 0.0;
      for (std::size_t p = 0; p < steps; ++p) {
        x += basis[p][i] *
             solver.eigenvectors()(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j));
      }
      out.vectors(i, j) = x;
    }
  }
  return out;
}

EigenPairs eigen_smallest_k(const SparseMatrix& s, std::size_t k) {
  if (k > s.size()) throw std::invalid_argument("eigen_smallest_k: k > n");
  if (s.size() <= kDenseLimit) return dense_smallest_k(s, k);
  return eigen_smallest_k_lanczos(s, k);
}

}  // namespace gcs
