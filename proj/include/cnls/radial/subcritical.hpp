#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cnls/amplitudes.hpp"
#include "cnls/error.hpp"
#include "cnls/instanton.hpp"
#include "cnls/model.hpp"
#include "cnls/radial/bn.hpp"
#include "cnls/radial/descent.hpp"

namespace cnls {

struct SubcriticalResult {
  VectorField field;
  double epsilon = 0.0;
  double energy = 0.0;             // A_eps = I_eps(minimizer)
  double residual = 0.0;
  double peak = 0.0;               // K_eps = max_i u_i(0)
  std::vector<double> norms;       // L^{2p-2eps} norm of each component
  int steps = 0;
};

/// I_eps on the grid of the ball problem: lambda = 0, exponent 2p - 2 eps.
inline CoupledFunctional subcritical_functional(const SubcriticalSpec& sub, GridPtr grid) {
  const auto& base = sub.base();
  return {std::move(grid), std::vector<double>(static_cast<std::size_t>(base.components()), 0.0),
          base.coupling(), sub.exponent()};
}

namespace sub_detail {

inline void check_profile(const VectorField& f, const CoupledFunctional& func, SubcriticalResult& out) {
  const auto& g = *f.grid();
  const double q = func.exponent();
  for (int i = 0; i < f.components(); ++i) {
    const auto& c = f.component(i);
    const double top = *std::max_element(c.begin(), c.end());
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (!(c[j] > 0.0))
        throw SolverError("component " + std::to_string(i + 1) + " is not positive at r = " +
                          std::to_string(g.node(static_cast<int>(j))));
      if (j + 1 < c.size() && c[j + 1] > c[j] + 1e-12 * top)
        throw SolverError("component " + std::to_string(i + 1) + " is not nonincreasing at r = " +
                          std::to_string(g.node(static_cast<int>(j))));
    }
    std::vector<double> pw(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) pw[j] = std::pow(c[j], q);
    const double norm = std::pow(g.integrate(pw), 1.0 / q);
    if (norm < 1e-10)
      throw SolverError("semi-trivial collapse: component " + std::to_string(i + 1) + " vanished");
    out.norms.push_back(norm);
  }
}

}  // namespace sub_detail

/// Least-energy positive radial solution of the regularized system
/// -Lap u_i = mu_i u_i^{2p-2eps-1} + sum_j beta_ij u_i^{p-eps-1} u_j^{p-eps} in B(0,R).
/// `warm` seeds the descent (a previous sweep point on the same grid).
inline SubcriticalResult solve_coupled_subcritical(const SubcriticalSpec& sub,
                                                   const VectorField* warm = nullptr) {
  const auto& base = sub.base();
  for (double l : base.lambda())
    if (l != 0.0) throw DomainError("the regularized ball problem has lambda = 0");
  const auto grid = warm != nullptr ? warm->grid() : spec_grid(base);
  const auto f = subcritical_functional(sub, grid);
  Components start;
  if (warm != nullptr) {
    if (warm->components() != base.components()) throw DomainError("warm start has the wrong size");
    start = warm->data();
  } else {
    const auto dk = minimize_dk(base.with_lambda(std::vector<double>(base.lambda().size(), 0.0)));
    start = best_start(f, dk.argmin.t);
  }
  auto run = minimize_on_nehari(f, std::move(start), DescentOptions::from(base.tolerances()));
  SubcriticalResult out{VectorField(grid, run.u), sub.epsilon(), run.energy, run.residual, 0.0, {},
                        run.steps};
  for (const auto& c : run.u) out.peak = std::max(out.peak, c.front());
  sub_detail::check_profile(out.field, f, out);
  return out;
}

/// Solves along the given eps values from largest to smallest, each solve
/// warm-started from the previous one. Results come back in that order.
inline std::vector<SubcriticalResult> eps_sweep(const ProblemSpec& base, std::vector<double> eps) {
  std::sort(eps.begin(), eps.end(), std::greater<>());
  std::vector<SubcriticalResult> out;
  for (double e : eps) {
    const SubcriticalSpec sub(base, e);
    out.push_back(solve_coupled_subcritical(sub, out.empty() ? nullptr : &out.back().field));
  }
  return out;
}

/// A_eps of every sub-system that drops one component; Lemma-style bound
/// A_eps < min_i C_eps(i). Only for k <= 3 (each entry is a full solve).
inline std::vector<double> semitrivial_levels(const SubcriticalSpec& sub) {
  const auto& base = sub.base();
  const int k = base.components();
  if (k > 3) throw DomainError("semi-trivial levels are computed only for k <= 3");
  std::vector<double> out;
  if (k == 1) return out;
  for (int drop = 0; drop < k; ++drop) {
    std::vector<int> keep;
    for (int i = 0; i < k; ++i)
      if (i != drop) keep.push_back(i);
    out.push_back(solve_coupled_subcritical(SubcriticalSpec(base.restricted(keep), sub.epsilon())).energy);
  }
  return out;
}

/// U_i(x) = K^{-1} u_i(K^{-alpha} x), K = max_i u_i(0). The dilated grid
/// keeps the node count, so every node maps onto a node and no interpolation
/// is needed; the largest component equals 1 at the origin.
inline VectorField blowup_rescale(const VectorField& field, double alpha) {
  double k = 0.0;
  for (int i = 0; i < field.components(); ++i) k = std::max(k, field.component(i).front());
  if (!(k > 0.0)) throw DomainError("blow-up rescaling needs a field positive at the origin");
  const auto& g = *field.grid();
  auto grid = share(g.dilated(std::pow(k, alpha)));
  Components comps = field.data();
  for (auto& c : comps)
    for (double& v : c) v /= k;
  return VectorField(grid, std::move(comps));
}

inline VectorField blowup_rescale(const VectorField& field, const SubcriticalSpec& sub) {
  return blowup_rescale(field, sub.alpha());
}

struct ProfileComparison {
  double distance = 0.0;     // max_i max_{r <= r_max} |U_i(r) - t_i U_{eps0}(r)|
  double scale = 0.0;        // eps0 with max_i t_i U_{eps0}(0) = 1
  double rescaled_radius = 0.0;
  std::vector<double> amplitudes;
};

/// Distance from a rescaled field to the synchronized instanton with the same
/// normalization (largest component 1 at the origin) on r in [0, r_max].
/// Beyond the rescaled ball the field counts as zero.
inline ProfileComparison compare_to_instanton(const VectorField& rescaled, const ProblemSpec& spec,
                                              double r_max = 5.0) {
  const auto dk = minimize_dk(spec.with_lambda(std::vector<double>(spec.lambda().size(), 0.0))
                                  .with_mode(DomainMode::whole_space, 0.0));
  const auto& t = dk.argmin.t;
  const int n = spec.dimension();
  const double tmax = *std::max_element(t.begin(), t.end());
  ProfileComparison out;
  out.amplitudes = t;
  out.scale = std::pow(instanton_prefactor(n) * tmax, 2.0 / (n - 2.0));
  out.rescaled_radius = rescaled.grid()->radius();
  const InstantonParams prm(out.scale, n);
  // every node inside [0, r_max], then (if the ball is smaller) the uncovered
  // stretch sampled at the last cell width
  const auto& g = *rescaled.grid();
  std::vector<double> samples;
  for (int j = 0; j < g.size() && g.node(j) <= r_max; ++j) samples.push_back(g.node(j));
  const double tail_step = g.spacing(g.size() - 1);
  for (double r = g.radius(); r <= r_max; r += tail_step) samples.push_back(r);
  for (int i = 0; i < rescaled.components(); ++i) {
    const auto f = rescaled.field(i);
    for (double r : samples)
      out.distance = std::max(out.distance,
                              std::abs(f.at(r) - t[static_cast<std::size_t>(i)] * eval_instanton(prm, r)));
  }
  return out;
}

}  // namespace cnls
