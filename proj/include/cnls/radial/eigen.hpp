#pragma once

#include <Eigen/SparseCholesky>

#include <cmath>
#include <vector>

#include "cnls/error.hpp"
#include "cnls/radial/grid.hpp"

namespace cnls {

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector;  // positive, normalized to max 1
  int iterations = 0;
};

/// First Dirichlet eigenpair of the discrete radial operator, K v = lambda Q v,
/// by inverse power iteration with a Rayleigh-quotient stopping rule.
inline EigenPair first_eigenpair(const RadialGrid& grid, double tol = 1e-10,
                                 int max_iter = 500) {
  const Eigen::SparseMatrix<double> k = grid.stiffness();
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(k);
  if (solver.info() != Eigen::Success) throw SolverError("stiffness factorization failed");
  const auto q = grid.volume_weights();
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd v(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double x = grid.node(static_cast<int>(j)) / grid.radius();
    v[j] = 1.0 - x * x;
  }
  double previous = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd rhs(n);
    for (Eigen::Index j = 0; j < n; ++j) rhs[j] = q[static_cast<std::size_t>(j)] * v[j];
    Eigen::VectorXd w = solver.solve(rhs);
    w /= w.cwiseAbs().maxCoeff();
    const Eigen::VectorXd kw = k * w;
    double wqw = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) wqw += q[static_cast<std::size_t>(j)] * w[j] * w[j];
    const double rayleigh = w.dot(kw) / wqw;
    v = w;
    if (it > 1 && std::abs(rayleigh - previous) <= tol * std::abs(rayleigh)) {
      return {rayleigh, std::vector<double>(v.data(), v.data() + n), it};
    }
    previous = rayleigh;
  }
  throw SolverError("inverse iteration stalled before the Rayleigh quotient settled");
}

/// lambda_1 of -Laplacian on B(0,R) with Dirichlet data, on this grid.
inline double eigen_lambda1(const RadialGrid& grid, double tol = 1e-10) {
  return first_eigenpair(grid, tol).value;
}

}  // namespace cnls
