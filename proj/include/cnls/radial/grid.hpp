#pragma once

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "cnls/error.hpp"

namespace cnls {

/// Area of the unit sphere S^{N-1} in R^N.
inline double unit_sphere_area(int n) {
  const double half = 0.5 * static_cast<double>(n);
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

/// Radial grid on [0, R] for radially symmetric functions in R^N.
///
/// Unknowns live at 0 = r_0 < r_1 < ... < r_M; the Dirichlet node
/// r_{M+1} = R carries the value 0 and is not stored. The default spacing is
/// uniform, r_j = j h with h = R/(M+1). A grading kappa > 0 instead places
/// r_j = R sinh(kappa j/(M+1)) / sinh(kappa): uniform near the origin and
/// geometric further out, so every length scale above R e^{-kappa} gets the
/// same relative resolution.
///
/// The discretization is a finite-volume one. The Dirichlet form is
///   sum_j C_j (u_{j+1} - u_j)^2,  C_j = |S^{N-1}| m_j^{N-1} / (r_{j+1} - r_j),
/// with m_j the midpoint of [r_j, r_{j+1}], and volume integrals use the exact
/// shell volumes Q_j of [m_{j-1}, m_j] (m_{-1} = 0). The operator reduces to
/// the symmetric ghost-node stencil 2N (u_0 - u_1)/h^2 at the origin and
/// reproduces the Laplacian of quadratics exactly on any node set.
class RadialGrid {
 public:
  RadialGrid(double radius, int interior_nodes, int dimension, double grading = 0.0)
      : radius_(radius), m_(interior_nodes), n_(dimension), grading_(grading) {
    if (!(radius > 0.0)) throw DomainError("grid radius must be positive");
    if (interior_nodes < 16) throw DomainError("grid needs at least 16 interior nodes");
    if (dimension < 1) throw DomainError("grid dimension must be positive");
    if (!(grading >= 0.0) || grading > 40.0) throw DomainError("grid grading must lie in [0, 40]");
    std::vector<double> r(static_cast<std::size_t>(m_ + 2));
    const double cells = static_cast<double>(m_ + 1);
    for (std::size_t j = 0; j < r.size(); ++j) {
      const double xi = static_cast<double>(j) / cells;
      r[j] = grading_ == 0.0 ? radius_ * xi : radius_ * std::sinh(grading_ * xi) / std::sinh(grading_);
    }
    r.back() = radius_;
    build(std::move(r));
  }

  /// Grid with explicit nodes r_0 = 0 < ... < r_M < r_{M+1} = R (the last
  /// entry is the Dirichlet radius). grading() reports 0 when the spacing is
  /// uniform to 1e-9 and -1 otherwise.
  static RadialGrid from_nodes(std::vector<double> r, int dimension) {
    if (r.size() < 18 || r.front() != 0.0) throw DomainError("grid needs r_0 = 0 and 16+ interior nodes");
    RadialGrid g;
    g.radius_ = r.back();
    g.m_ = static_cast<int>(r.size()) - 2;
    g.n_ = dimension;
    const double h = g.radius_ / static_cast<double>(g.m_ + 1);
    g.grading_ = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j)
      if (std::abs(r[j] - h * static_cast<double>(j)) > 1e-9 * g.radius_) g.grading_ = -1.0;
    g.build(std::move(r));
    return g;
  }

  double radius() const noexcept { return radius_; }
  /// Nodes strictly inside (0, R); the stored vectors have interior_nodes()+1
  /// entries because the origin is also an unknown.
  int interior_nodes() const noexcept { return m_; }
  int size() const noexcept { return m_ + 1; }
  int dimension() const noexcept { return n_; }
  double grading() const noexcept { return grading_; }
  bool uniform() const noexcept { return grading_ == 0.0; }
  /// Width of the first cell, r_1; equals h on a uniform grid.
  double step() const noexcept { return nodes_[1]; }
  /// r_{j+1} - r_j for j = 0..M (the last one reaches the boundary).
  double spacing(int j) const { return boundary(j + 1) - boundary(j); }
  double node(int j) const { return nodes_[static_cast<std::size_t>(j)]; }
  std::span<const double> nodes() const noexcept { return nodes_; }
  /// Q_j: measure of the control shell around node j.
  std::span<const double> volume_weights() const noexcept { return volume_; }
  /// C_j: conductance of the link between node j and node j+1 (C_M links to R).
  std::span<const double> conductances() const noexcept { return cond_; }

  /// Index of the cell [r_j, r_{j+1}) containing r, for 0 <= r < R.
  int cell(double r) const {
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r);
    return static_cast<int>(it - nodes_.begin()) - 1;
  }

  /// The same node pattern dilated by a factor s > 0.
  RadialGrid dilated(double s) const {
    if (!(s > 0.0)) throw DomainError("dilation factor must be positive");
    RadialGrid g = *this;
    g.radius_ *= s;
    std::vector<double> r(nodes_.size() + 1);
    for (std::size_t j = 0; j < nodes_.size(); ++j) r[j] = nodes_[j] * s;
    r.back() = g.radius_;
    g.build(std::move(r));
    return g;
  }

  /// sum_j Q_j f_j, the discrete counterpart of the integral over B(0,R).
  double integrate(std::span<const double> f) const {
    double s = 0.0;
    for (std::size_t j = 0; j < volume_.size(); ++j) s += volume_[j] * f[j];
    return s;
  }

  /// Discrete int |grad u|^2 with u = 0 at r = R.
  double dirichlet(std::span<const double> u) const {
    double s = 0.0;
    const std::size_t last = volume_.size() - 1;
    for (std::size_t j = 0; j <= last; ++j) {
      const double d = (j == last ? 0.0 : u[j + 1]) - u[j];
      s += cond_[j] * d * d;
    }
    return s;
  }

  /// Discrete int u^2.
  double mass(std::span<const double> u) const {
    double s = 0.0;
    for (std::size_t j = 0; j < volume_.size(); ++j) s += volume_[j] * u[j] * u[j];
    return s;
  }

  /// K u where K is half the Hessian of the Dirichlet form, i.e. the weak
  /// (volume-weighted) form of -Laplacian.
  std::vector<double> apply_stiffness(std::span<const double> u) const {
    const std::size_t size = volume_.size();
    std::vector<double> out(size, 0.0);
    for (std::size_t j = 0; j < size; ++j) {
      const double next = j + 1 < size ? u[j + 1] : 0.0;
      double v = cond_[j] * (u[j] - next);
      if (j > 0) v += cond_[j - 1] * (u[j] - u[j - 1]);
      out[j] = v;
    }
    return out;
  }

  /// Pointwise discrete Laplacian (strong form), -Q^{-1} K u.
  std::vector<double> laplacian(std::span<const double> u) const {
    auto out = apply_stiffness(u);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = -out[j] / volume_[j];
    return out;
  }

  /// K + shift * diag(Q) as a sparse symmetric tridiagonal matrix.
  Eigen::SparseMatrix<double> stiffness(double shift = 0.0) const {
    const auto size = static_cast<Eigen::Index>(volume_.size());
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(3 * size));
    for (Eigen::Index j = 0; j < size; ++j) {
      const auto js = static_cast<std::size_t>(j);
      double diag = cond_[js] + shift * volume_[js];
      if (j > 0) {
        diag += cond_[js - 1];
        trips.emplace_back(j, j - 1, -cond_[js - 1]);
      }
      if (j + 1 < size) trips.emplace_back(j, j + 1, -cond_[js]);
      trips.emplace_back(j, j, diag);
    }
    Eigen::SparseMatrix<double> k(size, size);
    k.setFromTriplets(trips.begin(), trips.end());
    return k;
  }

 private:
  RadialGrid() = default;

  double boundary(int j) const {
    return j <= m_ ? nodes_[static_cast<std::size_t>(j)] : radius_;
  }

  /// r holds r_0..r_{M+1}; r_{M+1} = R.
  void build(std::vector<double> r) {
    for (std::size_t j = 1; j < r.size(); ++j)
      if (!(r[j] > r[j - 1])) throw DomainError("grid nodes must be strictly increasing");
    const double area = unit_sphere_area(n_);
    const double nd = static_cast<double>(n_);
    const std::size_t size = r.size() - 1;
    volume_.assign(size, 0.0);
    cond_.assign(size, 0.0);
    double lo = 0.0;
    for (std::size_t j = 0; j < size; ++j) {
      const double mid = 0.5 * (r[j] + r[j + 1]);
      volume_[j] = area * (std::pow(mid, nd) - std::pow(lo, nd)) / nd;
      cond_[j] = area * std::pow(mid, nd - 1.0) / (r[j + 1] - r[j]);
      lo = mid;
    }
    r.pop_back();
    nodes_ = std::move(r);
  }

  double radius_ = 0.0;
  int m_ = 0;
  int n_ = 0;
  double grading_ = 0.0;
  std::vector<double> nodes_;
  std::vector<double> volume_;
  std::vector<double> cond_;
};

inline RadialGrid build_grid(double radius, int interior_nodes, int dimension, double grading = 0.0) {
  return RadialGrid(radius, interior_nodes, dimension, grading);
}

}  // namespace cnls
