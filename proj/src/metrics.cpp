#include "gcs/metrics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <stdexcept>

namespace gcs {
namespace {

using EMatrix = Eigen::MatrixXd;
using EMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

EMatrix to_eigen(const DenseMatrix& m) {
  return EMap(m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
}

DenseMatrix from_eigen(const EMatrix& m) {
  DenseMatrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = m(i, j);
    }
  }
  return out;
}

void check_orthonormal(const DenseMatrix& v, double tol = 1e-10) {
  const EMatrix ev = to_eigen(v);
  const double err = (ev.transpose() * ev - EMatrix::Identity(ev.cols(), ev.cols()))
                         .cwiseAbs()
                         .maxCoeff();
  if (err > tol) throw std::invalid_argument("V is not orthonormal (deviation " + std::to_string(err) + ")");
}

// P P^T V without materializing P P^T.
DenseMatrix project_onto_partition(const DenseMatrix& v, const Partition& p) {
  return lift_rows(p, coarse_features(v, p, FeatureMode::kNormalized));
}

// Orthonormal basis of span(V) with the Laplacian nullspace (per-component
// indicator vectors) projected out. Columns with negligible residual norm are dropped.
EMatrix deflated_basis(const DenseMatrix& v, const SparseMatrix& l) {
  const std::size_t n = l.size();
  // Components from the off-diagonal sparsity of L.
  std::vector<std::size_t> comp(n, static_cast<std::size_t>(-1));
  std::size_t num_comp = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] != static_cast<std::size_t>(-1)) continue;
    comp[s] = num_comp;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t q = l.row_ptr()[u]; q < l.row_ptr()[u + 1]; ++q) {
        const std::size_t w = l.col()[q];
        if (w != u && l.val()[q] != 0.0 && comp[w] == static_cast<std::size_t>(-1)) {
          comp[w] = num_comp;
          stack.push_back(w);
        }
      }
    }
    ++num_comp;
  }
  EMatrix nullspace = EMatrix::Zero(static_cast<Eigen::Index>(n),
                                    static_cast<Eigen::Index>(num_comp));
  std::vector<std::size_t> comp_size(num_comp, 0);
  for (std::size_t i = 0; i < n; ++i) ++comp_size[comp[i]];
  for (std::size_t i = 0; i < n; ++i) {
    nullspace(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(comp[i])) =
        1.0 / std::sqrt(static_cast<double>(comp_size[comp[i]]));
  }

  EMatrix b = to_eigen(v);
  b -= nullspace * (nullspace.transpose() * b);
  // Modified Gram-Schmidt, dropping rank-deficient columns.
  EMatrix q(b.rows(), b.cols());
  Eigen::Index r = 0;
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    Eigen::VectorXd col = b.col(j);
    for (Eigen::Index p = 0; p < r; ++p) col -= q.col(p).dot(col) * q.col(p);
    const double norm = col.norm();
    if (norm < 1e-8) continue;
    q.col(r++) = col / norm;
  }
  return q.leftCols(r);
}

EMatrix sparse_times_dense(const SparseMatrix& s, const EMatrix& x) {
  EMatrix y = EMatrix::Zero(x.rows(), x.cols());
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t q = s.row_ptr()[i]; q < s.row_ptr()[i + 1]; ++q) {
      y.row(static_cast<Eigen::Index>(i)) +=
          s.val()[q] * x.row(static_cast<Eigen::Index>(s.col()[q]));
    }
  }
  return y;
}

EMatrix project_eigen(const EMatrix& x, const Partition& p) {
  return to_eigen(project_onto_partition(from_eigen(x), p));
}

// Max generalized eigenvalue of (g1, g2), g2 symmetric PSD. Cholesky
// whitening with a pseudo-inverse fallback for ill-conditioned g2.
double max_generalized_eigenvalue(const EMatrix& g1, const EMatrix& g2) {
  Eigen::SelfAdjointEigenSolver<EMatrix> es2(g2);
  const Eigen::VectorXd ev = es2.eigenvalues();
  const double largest = ev(ev.size() - 1);
  if (largest <= 0.0) throw std::runtime_error("restricted_l_error: V^T L V singular after deflation");
  const bool well_conditioned = ev(0) > largest / 1e12;
  if (well_conditioned) {
    Eigen::LLT<EMatrix> llt(g2);
    if (llt.info() == Eigen::Success) {
      const EMatrix li = llt.matrixL().solve(EMatrix::Identity(g2.rows(), g2.cols()));
      const EMatrix m = li * g1 * li.transpose();
      Eigen::SelfAdjointEigenSolver<EMatrix> es(m);
      return es.eigenvalues()(es.eigenvalues().size() - 1);
    }
  }
  // Whiten through the eigendecomposition, dropping negligible directions.
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > largest * 1e-12) keep.push_back(i);
  }
  if (keep.empty()) throw std::runtime_error("restricted_l_error: V^T L V singular after deflation");
  EMatrix w(g2.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    w.col(static_cast<Eigen::Index>(j)) = es2.eigenvectors().col(keep[j]) / std::sqrt(ev(keep[j]));
  }
  Eigen::SelfAdjointEigenSolver<EMatrix> es(w.transpose() * g1 * w);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

}  // namespace

double nuclear_error(const DenseMatrix& v, const Partition& p) {
  check_orthonormal(v);
  const DenseMatrix projected = project_onto_partition(v, p);
  const DenseMatrix gram = matmul_tn(v, projected);  // V^T P P^T V
  double trace = 0.0;
  for (std::size_t j = 0; j < gram.rows(); ++j) trace += gram(j, j);
  return static_cast<double>(v.cols()) - trace;
}

double kmeans_cost(const DenseMatrix& v, const Partition& p) {
  double cost = 0.0;
  for (std::size_t j = 0; j < p.num_clusters(); ++j) {
    const auto& members = p.members()[j];
    std::vector<double> centroid(v.cols(), 0.0);
    for (std::size_t m : members) {
      for (std::size_t c = 0; c < v.cols(); ++c) centroid[c] += v(m, c);
    }
    for (double& x : centroid) x /= static_cast<double>(members.size());
    for (std::size_t m : members) {
      for (std::size_t c = 0; c < v.cols(); ++c) {
        const double t = v(m, c) - centroid[c];
        cost += t * t;
      }
    }
  }
  return cost;
}

double spectral_error(const DenseMatrix& v, const Partition& p) {
  check_orthonormal(v);
  const DenseMatrix projected = project_onto_partition(v, p);
  const EMatrix gram = to_eigen(matmul_tn(v, projected));
  const EMatrix m = EMatrix::Identity(gram.rows(), gram.cols()) - gram;
  Eigen::SelfAdjointEigenSolver<EMatrix> es(m);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

double restricted_l_error(const DenseMatrix& v, const Partition& p, const SparseMatrix& l) {
  const EMatrix b = deflated_basis(v, l);
  if (b.cols() == 0) return 0.0;
  const EMatrix r = b - project_eigen(b, p);
  const EMatrix g1 = r.transpose() * sparse_times_dense(l, r);
  const EMatrix g2 = b.transpose() * sparse_times_dense(l, b);
  const double lambda = max_generalized_eigenvalue(g1, g2);
  return std::sqrt(std::max(0.0, lambda));
}

long epsilon_similarity_check(const SparseMatrix& l, const Partition& p, const DenseMatrix& v,
                              std::size_t samples, std::uint64_t seed) {
  const double eps = restricted_l_error(v, p, l);
  if (eps >= 1.0) return -1;  // theorem precondition fails; nothing to assert
  const EMatrix b = deflated_basis(v, l);
  if (b.cols() == 0) return 0;

  // Coarse quadratic form P^T L P, k x k.
  const DenseMatrix pm = normalized_matrix(p);
  const EMatrix ep = to_eigen(pm);
  const EMatrix coarse_l = ep.transpose() * sparse_times_dense(l, ep);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  long violations = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    Eigen::VectorXd r(b.cols());
    for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = dist(rng);
    const Eigen::VectorXd y = b * r;
    // x = P^T y
    Eigen::VectorXd x = ep.transpose() * y;
    const Eigen::VectorXd ly = sparse_times_dense(l, EMatrix(y)).col(0);
    const double yly = y.dot(ly);
    const double xlx = x.dot(coarse_l * x);
    if (std::fabs(yly - xlx) > 3.0 * eps * yly + 1e-10) ++violations;
  }
  return violations;
}

double fixed_point_residual(const SparseMatrix& prop, double beta, const DenseMatrix& h,
                            const DenseMatrix& z) {
  const DenseMatrix pz = prop.multiply(z);
  double worst = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double r = z.data()[i] - (1.0 - beta) * pz.data()[i] - beta * h.data()[i];
    worst = std::max(worst, std::fabs(r));
  }
  return worst;
}

double variational_stationarity(const SparseMatrix& l, const std::vector<double>& degrees,
                                double beta, const DenseMatrix& h, const DenseMatrix& y) {
  const DenseMatrix ly = l.multiply(y);
  double worst = 0.0;
  for (std::size_t i = 0; i < y.rows(); ++i) {
    const double dsqrt = std::sqrt(degrees[i] + 1.0);
    for (std::size_t j = 0; j < y.cols(); ++j) {
      const double grad = 2.0 * (1.0 - beta) * ly(i, j) +
                          2.0 * beta * dsqrt * (dsqrt * y(i, j) - h(i, j));
      worst = std::max(worst, std::fabs(grad));
    }
  }
  return worst;
}

ReducedSystemResult reduced_system_check(const DenseMatrix& v, const Graph& g, double beta,
                                         const DenseMatrix& f, std::size_t steps) {
  check_orthonormal(v);
  const EMatrix ev = to_eigen(v);
  const EMatrix av = ev.transpose() * sparse_times_dense(g.adjacency(), ev);
  EMatrix dv = EMatrix::Zero(ev.cols(), ev.cols());
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    dv += g.degree(i) * ev.row(static_cast<Eigen::Index>(i)).transpose() *
          ev.row(static_cast<Eigen::Index>(i));
  }
  const Eigen::Index k = ev.cols();
  const EMatrix av_tilde = av + EMatrix::Identity(k, k);
  const EMatrix dv_tilde = dv + EMatrix::Identity(k, k);

  Eigen::SelfAdjointEigenSolver<EMatrix> es(dv_tilde);
  const EMatrix dv_half = es.operatorSqrt();
  const EMatrix dv_half_inv = es.operatorInverseSqrt();

  // Right-hand side: V^T D~^{1/2} F.
  EMatrix rhs_full(ev.rows(), static_cast<Eigen::Index>(f.cols()));
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    const double dsqrt = std::sqrt(g.degree(i) + 1.0);
    for (std::size_t j = 0; j < f.cols(); ++j) {
      rhs_full(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dsqrt * f(i, j);
    }
  }
  const EMatrix vt_rhs = ev.transpose() * rhs_full;
  const EMatrix h_prime = dv_half_inv * vt_rhs;

  const EMatrix m = dv_half_inv * av_tilde * dv_half_inv;
  const EMatrix system = EMatrix::Identity(k, k) - (1.0 - beta) * m;
  const EMatrix z_direct = system.partialPivLu().solve(beta * h_prime);

  EMatrix z = h_prime;
  for (std::size_t s = 0; s < steps; ++s) z = (1.0 - beta) * m * z + beta * h_prime;

  ReducedSystemResult result;
  result.recurrence_vs_solve = (z - z_direct).cwiseAbs().maxCoeff();

  // Gradient of the reduced quadratic at R* = D~_V^{-1/2} Z*.
  const EMatrix r_star = dv_half_inv * z_direct;
  const EMatrix grad = 2.0 * ((1.0 - beta) * (dv - av) * r_star +
                              beta * (dv_tilde * r_star - vt_rhs));
  result.stationarity = grad.cwiseAbs().maxCoeff();
  return result;
}

ErrorReport error_report(const DenseMatrix& v, const Partition& p, const SparseMatrix& l,
                         std::size_t samples, std::uint64_t seed) {
  ErrorReport report;
  report.nuclear_error = nuclear_error(v, p);
  report.kmeans_cost = kmeans_cost(v, p);
  if (std::fabs(report.nuclear_error - report.kmeans_cost) > 1e-8) {
    throw std::runtime_error("error_report: nuclear/k-means identity violated");
  }
  report.spectral_error = spectral_error(v, p);
  report.restricted_l_error = restricted_l_error(v, p, l);
  const long violations = epsilon_similarity_check(l, p, v, samples, seed);
  report.bound_violations = violations < 0 ? 0 : static_cast<std::size_t>(violations);
  return report;
}

}  // namespace gcs
