#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cnls/error.hpp"

namespace cnls {

enum class DomainMode { ball, whole_space };

inline const char* to_string(DomainMode m) {
  return m == DomainMode::ball ? "ball" : "whole-space";
}

/// Solver settings. Every numerical threshold used by the library lives here
/// so that a report can carry the exact set it was produced with.
struct Tolerances {
  double constraint = 1e-12;      // |P_k(t)| relative to |t|^2
  double newton = 1e-12;          // max_i |f_i(t)| for the amplitude system
  int newton_max_iter = 200;
  int starts = 32;                // random multi-starts for d_k
  std::uint64_t seed = 20210601;
  double strict = 1e-10;          // absolute margin for strict inequalities
  int grid_nodes = 2000;          // M, nodes strictly inside (0, R)
  double grid_grading = 0.0;      // 0: uniform; kappa > 0: sinh-graded toward the origin
  double descent_decrease = 1e-12;
  int descent_window = 50;
  int descent_max_steps = 20000;
  double pde_residual = 1e-11;    // relative max-norm of discrete PDE residual
  double eigen = 1e-10;           // Rayleigh quotient stagnation
  double quadrature = 1e-13;      // relative, instanton integrals

  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

/// A k-component cooperative system on a ball B(0,R) or on the whole space.
///
/// The coupling matrix holds mu_i on the diagonal and beta_ij off it. The
/// critical exponent p = N/(N-2) is derived from N on demand.
class ProblemSpec {
 public:
  ProblemSpec(int dimension, std::vector<double> lambda, Eigen::MatrixXd coupling,
              DomainMode mode, double radius, Tolerances tol = {})
      : dimension_(dimension),
        lambda_(std::move(lambda)),
        coupling_(std::move(coupling)),
        mode_(mode),
        radius_(radius),
        tol_(tol) {
    const auto k = static_cast<Eigen::Index>(lambda_.size());
    if (k < 1) throw SpecError("components", "at least one component is required");
    if (coupling_.rows() != k || coupling_.cols() != k)
      throw SpecError("coupling", "coupling matrix must be k x k with k = lambda.size()");
    if (dimension_ < 3) throw SpecError("dimension", "dimension must be at least 3");
  }

  /// Convenience for the common configuration form: mu on the diagonal and the
  /// flattened upper triangle (row-major) for beta.
  static ProblemSpec from_upper(int dimension, std::vector<double> lambda,
                                std::span<const double> mu,
                                std::span<const double> beta_upper, DomainMode mode,
                                double radius, Tolerances tol = {}) {
    const auto k = static_cast<Eigen::Index>(mu.size());
    if (static_cast<std::size_t>(k * (k - 1) / 2) != beta_upper.size())
      throw SpecError("beta", "beta must hold k(k-1)/2 entries");
    Eigen::MatrixXd r(k, k);
    std::size_t next = 0;
    for (Eigen::Index i = 0; i < k; ++i) {
      r(i, i) = mu[static_cast<std::size_t>(i)];
      for (Eigen::Index j = i + 1; j < k; ++j) {
        r(i, j) = r(j, i) = beta_upper[next++];
      }
    }
    return ProblemSpec(dimension, std::move(lambda), std::move(r), mode, radius, tol);
  }

  int dimension() const noexcept { return dimension_; }
  int components() const noexcept { return static_cast<int>(lambda_.size()); }
  const std::vector<double>& lambda() const noexcept { return lambda_; }
  const Eigen::MatrixXd& coupling() const noexcept { return coupling_; }
  double mu(int i) const { return coupling_(i, i); }
  double beta(int i, int j) const { return coupling_(i, j); }
  DomainMode mode() const noexcept { return mode_; }
  double radius() const noexcept { return radius_; }
  const Tolerances& tolerances() const noexcept { return tol_; }

  /// p = N/(N-2); 2p is the critical Sobolev exponent.
  double p() const noexcept {
    return static_cast<double>(dimension_) / static_cast<double>(dimension_ - 2);
  }
  double critical_exponent() const noexcept { return 2.0 * p(); }

  bool equal_lambda() const noexcept {
    for (double l : lambda_)
      if (l != lambda_.front()) return false;
    return true;
  }

  std::vector<double> mu_vector() const {
    std::vector<double> out(lambda_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = coupling_(i, i);
    return out;
  }

  /// Upper triangle of the coupling, row-major (the configuration layout).
  std::vector<double> beta_upper() const {
    std::vector<double> out;
    const auto k = coupling_.rows();
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = i + 1; j < k; ++j) out.push_back(coupling_(i, j));
    return out;
  }

  /// The sub-system on the listed component indices (others replaced by 0).
  ProblemSpec restricted(std::span<const int> indices) const {
    const auto m = static_cast<Eigen::Index>(indices.size());
    Eigen::MatrixXd r(m, m);
    std::vector<double> lam(indices.size());
    for (Eigen::Index a = 0; a < m; ++a) {
      lam[static_cast<std::size_t>(a)] = lambda_[static_cast<std::size_t>(indices[a])];
      for (Eigen::Index b = 0; b < m; ++b) r(a, b) = coupling_(indices[a], indices[b]);
    }
    return ProblemSpec(dimension_, std::move(lam), std::move(r), mode_, radius_, tol_);
  }

  ProblemSpec with_lambda(std::vector<double> lambda) const {
    return ProblemSpec(dimension_, std::move(lambda), coupling_, mode_, radius_, tol_);
  }
  ProblemSpec with_coupling(Eigen::MatrixXd coupling) const {
    return ProblemSpec(dimension_, lambda_, std::move(coupling), mode_, radius_, tol_);
  }
  ProblemSpec with_tolerances(Tolerances tol) const {
    return ProblemSpec(dimension_, lambda_, coupling_, mode_, radius_, tol);
  }
  ProblemSpec with_mode(DomainMode mode, double radius) const {
    return ProblemSpec(dimension_, lambda_, coupling_, mode, radius, tol_);
  }

  friend bool operator==(const ProblemSpec& a, const ProblemSpec& b) {
    return a.dimension_ == b.dimension_ && a.lambda_ == b.lambda_ &&
           a.coupling_ == b.coupling_ && a.mode_ == b.mode_ && a.radius_ == b.radius_ &&
           a.tol_ == b.tol_;
  }

 private:
  int dimension_;
  std::vector<double> lambda_;
  Eigen::MatrixXd coupling_;
  DomainMode mode_;
  double radius_;
  Tolerances tol_;
};

/// The epsilon-regularized problem on B(0,1): exponent 2p - 2 eps replaces 2p.
class SubcriticalSpec {
 public:
  SubcriticalSpec(ProblemSpec base, double epsilon)
      : base_(std::move(base)), epsilon_(epsilon) {
    if (!(epsilon_ > 0.0 && epsilon_ < base_.p() - 1.0))
      throw SpecError("epsilon", "epsilon must lie in (0, p-1)");
  }
  const ProblemSpec& base() const noexcept { return base_; }
  double epsilon() const noexcept { return epsilon_; }
  /// 2p - 2 eps.
  double exponent() const noexcept { return base_.critical_exponent() - 2.0 * epsilon_; }
  /// Blow-up exponent alpha = p - 1 - eps.
  double alpha() const noexcept { return base_.p() - 1.0 - epsilon_; }

 private:
  ProblemSpec base_;
  double epsilon_;
};

}  // namespace cnls
