#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "cnls/error.hpp"
#include "cnls/model.hpp"
#include "cnls/radial/field.hpp"

namespace cnls {

using Components = std::vector<std::vector<double>>;

/// E(u) = 1/2 sum_i int (|grad u_i|^2 + lambda_i u_i^2)
///        - 1/q int sum_ij R_ij |u_i|^{q/2} |u_j|^{q/2}
/// on a radial grid. q = 2p gives the critical energy, q = 2p - 2 eps the
/// regularized one.
class CoupledFunctional {
 public:
  CoupledFunctional(GridPtr grid, std::vector<double> lambda, Eigen::MatrixXd coupling, double q)
      : grid_(std::move(grid)), lambda_(std::move(lambda)), coupling_(std::move(coupling)), q_(q) {
    if (!grid_) throw DomainError("functional needs a grid");
    if (!(q_ > 2.0)) throw DomainError("functional exponent must exceed 2");
    if (coupling_.rows() != coupling_.cols() ||
        static_cast<std::size_t>(coupling_.rows()) != lambda_.size())
      throw DomainError("functional: lambda and coupling sizes disagree");
  }

  static CoupledFunctional critical(const ProblemSpec& spec, GridPtr grid) {
    return {std::move(grid), spec.lambda(), spec.coupling(), spec.critical_exponent()};
  }

  const GridPtr& grid() const noexcept { return grid_; }
  int components() const noexcept { return static_cast<int>(lambda_.size()); }
  double exponent() const noexcept { return q_; }
  double half_exponent() const noexcept { return 0.5 * q_; }
  const std::vector<double>& lambda() const noexcept { return lambda_; }
  const Eigen::MatrixXd& coupling() const noexcept { return coupling_; }

  /// sum_i int (|grad u_i|^2 + lambda_i u_i^2)
  double quadratic(const Components& u) const {
    check(u);
    double a = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
      a += grid_->dirichlet(u[i]) + lambda_[i] * grid_->mass(u[i]);
    return a;
  }
  double quadratic(const VectorField& f) const {
    double a = 0.0;
    for (int i = 0; i < f.components(); ++i)
      a += f.quadratic_form(i, lambda_[static_cast<std::size_t>(i)]);
    return a;
  }

  /// int sum_ij R_ij |u_i|^s |u_j|^s with s = q/2.
  double nonlinear(const Components& u) const {
    check(u);
    const double s = half_exponent();
    const auto q = grid_->volume_weights();
    const std::size_t k = u.size();
    std::vector<double> pw(k);
    double total = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      for (std::size_t i = 0; i < k; ++i) pw[i] = std::pow(std::abs(u[i][j]), s);
      double local = 0.0;
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t l = 0; l < k; ++l)
          local += coupling_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) * pw[i] * pw[l];
      total += q[j] * local;
    }
    return total;
  }
  double nonlinear(const VectorField& f) const { return nonlinear(f.data()); }

  double energy(const Components& u) const { return 0.5 * quadratic(u) - nonlinear(u) / q_; }
  double energy(const VectorField& f) const { return 0.5 * quadratic(f) - nonlinear(f) / q_; }

  /// G(u) = E'(u)u = a(u) - b(u); zero on the Nehari manifold.
  double nehari_constraint(const Components& u) const { return quadratic(u) - nonlinear(u); }

  /// Pointwise reaction g_i = (sum_l R_il |u_l|^s) |u_i|^{s-2} u_i at every node.
  Components reaction(const Components& u) const {
    check(u);
    const double s = half_exponent();
    const std::size_t k = u.size();
    const std::size_t n = u.front().size();
    Components g(k, std::vector<double>(n, 0.0));
    std::vector<double> pw(k);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < k; ++i) pw[i] = std::pow(std::abs(u[i][j]), s);
      for (std::size_t i = 0; i < k; ++i) {
        const double ui = u[i][j];
        if (ui == 0.0) continue;
        double c = 0.0;
        for (std::size_t l = 0; l < k; ++l)
          c += coupling_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) * pw[l];
        g[i][j] = c * std::pow(std::abs(ui), s - 2.0) * ui;
      }
    }
    return g;
  }

  /// Gradient of E with respect to the nodal values: (K + lambda_i Q) u_i - Q g_i.
  Components gradient(const Components& u) const {
    auto g = reaction(u);
    const auto q = grid_->volume_weights();
    for (std::size_t i = 0; i < u.size(); ++i) {
      const auto ku = grid_->apply_stiffness(u[i]);
      for (std::size_t j = 0; j < ku.size(); ++j)
        g[i][j] = ku[j] + lambda_[i] * q[j] * u[i][j] - q[j] * g[i][j];
    }
    return g;
  }

  /// Strong-form residual -Lap u_i + lambda_i u_i - g_i, node by node.
  Components pde_residual(const Components& u) const {
    auto r = gradient(u);
    const auto q = grid_->volume_weights();
    for (auto& c : r)
      for (std::size_t j = 0; j < c.size(); ++j) c[j] /= q[j];
    return r;
  }

  /// Residual measured as a correction: max |K^{-1} E'(u)| / max |u|, with K
  /// the Dirichlet stiffness. Dividing by the cell volumes instead would
  /// amplify roundoff in the tiny cells near the origin, and a plain
  /// weak-form norm would not see those cells (nor smooth error modes).
  double relative_residual(const Components& u) const {
    const auto r = gradient(u);
    double top = 0.0, worst = 0.0;
    for (const auto& comp : u)
      for (double v : comp) top = std::max(top, std::abs(v));
    if (!(top > 0.0)) return 0.0;
    const auto n = static_cast<Eigen::Index>(grid_->size());
    for (const auto& comp : r) {
      const Eigen::VectorXd x = stiffness_solver().solve(Eigen::Map<const Eigen::VectorXd>(comp.data(), n));
      worst = std::max(worst, x.cwiseAbs().maxCoeff());
    }
    return worst / top;
  }

  /// Cached LDLT factorization of the Dirichlet stiffness K.
  const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>& stiffness_solver() const {
    if (!ldlt_) {
      ldlt_ = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>(grid_->stiffness());
      if (ldlt_->info() != Eigen::Success) throw SolverError("stiffness factorization failed");
    }
    return *ldlt_;
  }

  /// t with t^{q-2} = a(u)/b(u), the maximizer of E(t u) over t > 0.
  double nehari_factor(const Components& u) const {
    const double a = quadratic(u);
    const double b = nonlinear(u);
    if (!(a > 0.0))
      throw DomainError("nonpositive numerator in Nehari scaling: quadratic form not coercive "
                        "(lambda at or below -lambda_1?)");
    if (!(b > 0.0)) throw DomainError("nonpositive denominator in Nehari scaling: field vanishes");
    return std::pow(a / b, 1.0 / (q_ - 2.0));
  }

  /// max_t E(t u) = (1/2 - 1/q) a^{q/(q-2)} b^{-2/(q-2)}; invariant under scaling.
  double reduced(const Components& u) const {
    const double a = quadratic(u);
    const double b = nonlinear(u);
    if (!(a > 0.0) || !(b > 0.0)) return std::numeric_limits<double>::infinity();
    return (0.5 - 1.0 / q_) * std::pow(a, q_ / (q_ - 2.0)) * std::pow(b, -2.0 / (q_ - 2.0));
  }

 private:
  void check(const Components& u) const {
    if (u.size() != lambda_.size()) throw DomainError("functional: component count mismatch");
    for (const auto& c : u)
      if (c.size() != static_cast<std::size_t>(grid_->size()))
        throw DomainError("functional: field does not live on this grid");
  }

  GridPtr grid_;
  std::vector<double> lambda_;
  Eigen::MatrixXd coupling_;
  double q_;
  mutable std::shared_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt_;
};

/// Closed-form Nehari factor for the critical energy of spec.
inline double nehari_scale(const ProblemSpec& spec, const VectorField& field) {
  return CoupledFunctional::critical(spec, field.grid()).nehari_factor(field.data());
}

}  // namespace cnls
