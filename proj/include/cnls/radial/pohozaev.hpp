#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "cnls/model.hpp"
#include "cnls/radial/functional.hpp"

namespace cnls {

/// Terms of the Pohozaev identity with star center at the origin:
///   1/(2p) int sum |grad u_i|^2 + 1/(2N) oint sum |du_i/dn|^2 (x.n)
///   - 1/(2p) int sum R_ij |u_i|^p |u_j|^p + 1/2 int sum lambda_i u_i^2 = 0.
struct PohozaevReport {
  double gradient = 0.0;   // 1/(2p) int sum |grad u_i|^2
  double boundary = 0.0;   // 1/(2N) oint sum |du_i/dn|^2 (x.n)
  double coupling = 0.0;   // -1/(2p) int sum R_ij |u_i|^p |u_j|^p
  double lambda = 0.0;     // 1/2 int sum lambda_i u_i^2
  double absolute = 0.0;
  double relative = 0.0;   // |absolute| / largest term magnitude
  bool nonexistence_consistent = false;

  /// Recomputes the residuals from the four terms.
  void recompute() {
    absolute = gradient + boundary + coupling + lambda;
    const double scale = std::max({std::abs(gradient), std::abs(boundary), std::abs(coupling),
                                   std::abs(lambda)});
    relative = scale > 0.0 ? std::abs(absolute) / scale : 0.0;
  }
};

/// Evaluates the identity on a ball field. The normal derivative at r = R is
/// the derivative at R of the quadratic through (r_{M-1}, u_{M-1}), (r_M, u_M)
/// and (R, 0): (3 u(R) - 4 u_M + u_{M-1}) / (2h) on a uniform grid.
/// For lambda >= 0 a solution would need lambda-term + boundary term = 0 with
/// both nonnegative; `nonexistence_consistent` flags fields where that sum is
/// strictly positive, i.e. the identity rules them out as solutions.
inline PohozaevReport pohozaev_residual(const ProblemSpec& spec, const VectorField& field) {
  const auto& g = *field.grid();
  const auto f = CoupledFunctional::critical(spec, field.grid());
  const double p = spec.p();
  const double n = static_cast<double>(spec.dimension());
  PohozaevReport rep;
  double grad = 0.0, flux = 0.0, mass = 0.0;
  const auto m = static_cast<std::size_t>(g.interior_nodes());
  for (int i = 0; i < field.components(); ++i) {
    grad += field.dirichlet(i);
    mass += spec.lambda()[static_cast<std::size_t>(i)] * field.mass(i);
    const auto& c = field.component(i);
    const double a = g.node(static_cast<int>(m) - 1), b = g.node(static_cast<int>(m)), r = g.radius();
    // Lagrange basis derivatives at r = R (u(R) = 0 drops its term)
    const double du = c[m - 1] * (r - b) / ((a - b) * (a - r)) + c[m] * (r - a) / ((b - a) * (b - r));
    flux += du * du;
  }
  const double r = g.radius();
  rep.gradient = grad / (2.0 * p);
  rep.boundary = flux * unit_sphere_area(spec.dimension()) * std::pow(r, n - 1.0) * r / (2.0 * n);
  rep.coupling = -f.nonlinear(field) / (2.0 * p);
  rep.lambda = 0.5 * mass;
  rep.recompute();
  bool nonnegative_lambda = true;
  for (double l : spec.lambda()) nonnegative_lambda = nonnegative_lambda && l >= 0.0;
  rep.nonexistence_consistent = nonnegative_lambda && rep.lambda + rep.boundary > 0.0;
  return rep;
}

}  // namespace cnls
