#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "cnls/amplitudes.hpp"
#include "cnls/error.hpp"
#include "cnls/instanton.hpp"
#include "cnls/model.hpp"
#include "cnls/radial/descent.hpp"

namespace cnls {

struct BnResult {
  VectorField omega;     // one component, solves -Lap w + lambda w = mu w^{2*-1}
  double energy = 0.0;   // B_mu = E(omega)
  double s_lambda = 0.0; // int(|grad w|^2 + lambda w^2) / (int w^{2*})^{2/2*}
  double bound = 0.0;    // (1/N) mu^{-(N-2)/2} S^{N/2}
  double margin = 0.0;   // bound - energy
  double residual = 0.0;
  double lambda = 0.0;
  double mu = 1.0;
  int steps = 0;
  int newton_iterations = 0;
};

/// The grid a ball-mode spec is solved on: M = tolerances.grid_nodes,
/// grading tolerances.grid_grading.
inline GridPtr spec_grid(const ProblemSpec& spec) {
  if (spec.mode() != DomainMode::ball) throw DomainError("bounded-domain solve needs ball mode");
  const auto& t = spec.tolerances();
  return make_grid(spec.radius(), t.grid_nodes, spec.dimension(), t.grid_grading);
}

/// Least-energy positive radial solution of the scalar Brezis-Nirenberg
/// problem -Lap u + lambda u = mu u^{2*-1} in B(0,R), u = 0 on the boundary.
inline BnResult solve_bn(const ProblemSpec& spec, const GridPtr& grid) {
  if (spec.components() != 1) throw DomainError("solve_bn takes a one-component spec");
  const double lambda = spec.lambda()[0];
  const double mu = spec.mu(0);
  if (!(lambda < 0.0)) throw DomainError("solve_bn needs lambda < 0");
  if (!(mu > 0.0)) throw DomainError("solve_bn needs mu > 0");
  const double lam1 = eigen_lambda1(*grid, spec.tolerances().eigen);
  if (!(lambda > -lam1))
    throw DomainError("solve_bn needs lambda > -lambda_1 = " + std::to_string(-lam1));

  const auto f = CoupledFunctional::critical(spec, grid);
  const std::vector<double> one{1.0};
  auto run = minimize_on_nehari(f, best_start(f, one), DescentOptions::from(spec.tolerances()));

  BnResult out{VectorField(grid, run.u), run.energy, 0.0, 0.0, 0.0, run.residual, lambda, mu,
               run.steps, run.newton_iterations};
  const int n = spec.dimension();
  const double p = spec.p();
  const auto& w = out.omega.component(0);
  double crit = 0.0;
  {
    std::vector<double> pw(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) pw[j] = std::pow(w[j], 2.0 * p);
    crit = grid->integrate(pw);
  }
  out.s_lambda = out.omega.quadratic_form(0, lambda) / std::pow(crit, 1.0 / p);
  const double s = sobolev_constant(n);
  out.bound = std::pow(mu, -0.5 * (n - 2)) * std::pow(s, 0.5 * n) / n;
  out.margin = out.bound - out.energy;
  if (!(out.margin > spec.tolerances().strict))
    throw StrictnessViolation("B_mu", "(1/N) mu^{-(N-2)/2} S^{N/2}", out.margin,
                              "B_mu is not below (1/N) mu^{-(N-2)/2} S^{N/2}: grid too coarse?");
  return out;
}

inline BnResult solve_bn(const ProblemSpec& spec) { return solve_bn(spec, spec_grid(spec)); }

/// solve_bn on the one-component view {i} of spec.
inline BnResult solve_bn(const ProblemSpec& spec, int component) {
  const int idx[1] = {component};
  return solve_bn(spec.restricted(idx));
}

struct SynchronizedSolution {
  VectorField field;      // (t_i omega), omega the mu = 1 solution
  BnResult omega;
  DkResult dk;
  double energy = 0.0;    // E(field)
  double predicted = 0.0; // d_k S_lambda^{N/2}
  double relative_gap = 0.0;
  double residual = 0.0;  // coupled strong-form residual
};

/// (t~_1 w, ..., t~_k w) with t~ the d_k minimizer and w the positive solution
/// of -Lap w + lambda w = w^{2*-1}; its energy is d_k S_lambda^{N/2}.
inline SynchronizedSolution synchronized_bounded_solution(const ProblemSpec& spec) {
  if (!spec.equal_lambda()) throw DomainError("synchronized solution needs equal lambda_i");
  const auto grid = spec_grid(spec);
  Eigen::MatrixXd unit(1, 1);
  unit(0, 0) = 1.0;
  const ProblemSpec scalar(spec.dimension(), {spec.lambda()[0]}, unit, DomainMode::ball,
                           spec.radius(), spec.tolerances());
  auto bn = solve_bn(scalar, grid);
  auto dk = minimize_dk(spec);
  Components comps;
  for (double t : dk.argmin.t) {
    auto c = bn.omega.component(0);
    for (double& v : c) v *= t;
    comps.push_back(std::move(c));
  }
  VectorField field(grid, comps);
  const auto f = CoupledFunctional::critical(spec, grid);
  SynchronizedSolution out{field, bn, dk, f.energy(comps), 0.0, 0.0, f.relative_residual(comps)};
  out.predicted = dk.value * std::pow(bn.s_lambda, 0.5 * spec.dimension());
  out.relative_gap = std::abs(out.energy - out.predicted) / out.predicted;
  if (out.relative_gap > 1e-6)
    throw SolverError("synchronized energy misses d_k S_lambda^{N/2} by " +
                      std::to_string(out.relative_gap));
  return out;
}

}  // namespace cnls
