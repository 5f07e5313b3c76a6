#pragma once

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cnls/error.hpp"
#include "cnls/radial/eigen.hpp"
#include "cnls/radial/functional.hpp"

namespace cnls {

struct DescentOptions {
  double decrease = 1e-12;  // relative decrease of max_t E(tu) over one window
  int window = 50;
  int max_steps = 20000;
  double armijo = 1e-4;
  double newton_tol = 1e-11;  // relative nodal residual after polishing
  int newton_max_iter = 60;
  double max_relative_step = 0.1;
  bool polish = true;

  static DescentOptions from(const Tolerances& t) {
    DescentOptions o;
    o.decrease = t.descent_decrease;
    o.window = t.descent_window;
    o.max_steps = t.descent_max_steps;
    o.newton_tol = t.pde_residual;
    return o;
  }
};

struct DescentResult {
  Components u;                 // on the Nehari manifold, nonnegative
  double energy = 0.0;          // E(u) after polishing
  double energy_descent = 0.0;  // E at the end of the descent phase
  double residual = 0.0;        // relative nodal residual
  int steps = 0;
  int newton_iterations = 0;
};

namespace descent_detail {

inline void absolute(Components& u) {
  for (auto& c : u)
    for (double& v : c) v = std::abs(v);
}

inline void scale(Components& u, double t) {
  for (auto& c : u)
    for (double& v : c) v *= t;
}

inline double dot(const Components& a, const Components& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) s += a[i][j] * b[i][j];
  return s;
}

/// Newton's method on the discrete Euler-Lagrange system from a positive
/// iterate. Steps are damped to keep every component positive and to reduce
/// the residual. Stops at `tol`; a stall or the iteration cap is tolerated
/// down to `stall_tol`. Returns the number of iterations taken.
inline int newton_polish(const CoupledFunctional& f, Components& u, double tol, int max_iter,
                         double stall_tol = 1e-6) {
  const auto& grid = *f.grid();
  const auto qw = grid.volume_weights();
  const std::size_t k = u.size();
  const std::size_t n = u.front().size();
  const double s = f.half_exponent();
  const auto& c = f.coupling();
  const Eigen::SparseMatrix<double> kmat = grid.stiffness();
  auto norm = [&](const Components& v) { return f.relative_residual(v); };
  double current = norm(u);
  for (int it = 0; it < max_iter; ++it) {
    if (current <= tol) return it;
    for (const auto& comp : u)
      for (double v : comp)
        if (!(v > 0.0)) throw SolverError("Newton polish needs a strictly positive iterate");
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(k * (3 * n + k * n));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(k * n));
    const auto grad = f.gradient(u);
    std::vector<double> pw(k);
    for (std::size_t i = 0; i < k; ++i) {
      const auto off = static_cast<Eigen::Index>(i * n);
      for (int col = 0; col < kmat.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator e(kmat, col); e; ++e)
          trips.emplace_back(off + e.row(), off + e.col(), e.value());
      for (std::size_t j = 0; j < n; ++j) rhs[off + static_cast<Eigen::Index>(j)] = -grad[i][j];
    }
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < k; ++i) pw[i] = std::pow(u[i][j], s);
      for (std::size_t i = 0; i < k; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        double sum = 0.0;
        for (std::size_t l = 0; l < k; ++l) sum += c(ii, static_cast<Eigen::Index>(l)) * pw[l];
        const double ui = u[i][j];
        const auto row = static_cast<Eigen::Index>(i * n + j);
        // d g_i / d u_i and d g_i / d u_l
        double diag = f.lambda()[i] * qw[j];
        diag -= qw[j] * ((s - 1.0) * std::pow(ui, s - 2.0) * sum +
                         std::pow(ui, s - 1.0) * c(ii, ii) * s * std::pow(ui, s - 1.0));
        trips.emplace_back(row, row, diag);
        for (std::size_t l = 0; l < k; ++l) {
          if (l == i) continue;
          const double d = std::pow(ui, s - 1.0) * c(ii, static_cast<Eigen::Index>(l)) * s *
                           std::pow(u[l][j], s - 1.0);
          trips.emplace_back(row, static_cast<Eigen::Index>(l * n + j), -qw[j] * d);
        }
      }
    }
    Eigen::SparseMatrix<double> jac(static_cast<Eigen::Index>(k * n), static_cast<Eigen::Index>(k * n));
    jac.setFromTriplets(trips.begin(), trips.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(jac);
    lu.factorize(jac);
    if (lu.info() != Eigen::Success) throw SolverError("Newton polish: singular Jacobian");
    // a few rounds of iterative refinement: the Jacobian inherits the
    // O(M^2) conditioning of the stiffness matrix
    Eigen::VectorXd delta = lu.solve(rhs);
    for (int round = 0; round < 3; ++round) delta += lu.solve(rhs - jac * delta);
    double step = 1.0;
    bool accepted = false;
    for (int half = 0; half < 40; ++half, step *= 0.5) {
      Components trial = u;
      bool positive = true;
      for (std::size_t i = 0; i < k && positive; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          trial[i][j] += step * delta[static_cast<Eigen::Index>(i * n + j)];
          if (!(trial[i][j] > 0.0)) {
            positive = false;
            break;
          }
        }
      if (!positive) continue;
      const double next = norm(trial);
      if (next < current) {
        u = std::move(trial);
        current = next;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // at the critical exponent dilations are almost a symmetry, so the
      // Jacobian has a near-kernel and Newton can stall once the energy has
      // converged; the descent point is kept when its residual is still small
      if (current <= stall_tol) return it;
      throw SolverError("Newton polish stalled at relative residual " +
                        std::to_string(f.relative_residual(u)));
    }
  }
  if (current <= stall_tol) return max_iter;
  throw SolverError("Newton polish did not reach the residual tolerance");
}

/// Rejects minimizers whose half-maximum radius spans fewer than 8 grid
/// steps. On a radial grid the origin cell admits spikes whose discrete
/// Sobolev quotient lies far below S, so such an iterate is a discretization
/// artifact rather than an approximation of a PDE solution.
inline void check_resolved(const Components& u) {
  for (const auto& c : u) {
    const double top = *std::max_element(c.begin(), c.end());
    if (!(top > 0.0)) continue;
    std::size_t j = 0;
    while (j < c.size() && c[j] >= 0.5 * top) ++j;
    if (j < 8)
      throw SolverError("minimizer concentrated at grid scale (half-max radius " +
                        std::to_string(j) + " steps): refine the grid");
  }
}

}  // namespace descent_detail

/// Minimizes max_t E(t u) over nonnegative fields. Each step moves along the
/// Sobolev gradient -K^{-1} E'(u) with Armijo backtracking, takes absolute
/// values, and rescales onto the Nehari manifold. The descent stops once the
/// reduced energy drops by less than `decrease` (relative) over `window`
/// steps; Newton's method on the Euler-Lagrange system then removes the
/// remaining slow modes.
inline DescentResult minimize_on_nehari(const CoupledFunctional& f, Components u,
                                        const DescentOptions& opt = {}) {
  using namespace descent_detail;
  const auto& grid = *f.grid();
  const auto qn = static_cast<Eigen::Index>(grid.size());
  const auto& pre = f.stiffness_solver();

  absolute(u);
  scale(u, f.nehari_factor(u));
  const double q = f.exponent();
  std::vector<double> history{f.reduced(u)};
  DescentResult out;
  double alpha = 1.0;
  bool converged = false;
  for (int step = 1; step <= opt.max_steps; ++step) {
    const double j0 = history.back();
    const auto g = f.gradient(u);
    Components d(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      Eigen::VectorXd gi = Eigen::Map<const Eigen::VectorXd>(g[i].data(), qn);
      Eigen::VectorXd di = -pre.solve(gi);
      d[i].assign(di.data(), di.data() + qn);
    }
    // slope of the reduced energy along d at a Nehari point
    const double slope = j0 * 2.0 * q / ((q - 2.0) * f.quadratic(u)) * dot(g, d);
    if (!(slope < 0.0)) {
      converged = true;
      out.steps = step - 1;
      break;
    }
    // trust region: no node moves by more than a tenth of the current peak,
    // which keeps the iterate out of the grid-scale spike basin at the origin
    double peak = 0.0, dmax = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
      for (std::size_t jn = 0; jn < u[i].size(); ++jn) {
        peak = std::max(peak, std::abs(u[i][jn]));
        dmax = std::max(dmax, std::abs(d[i][jn]));
      }
    alpha = std::min({1.0, 2.0 * alpha, opt.max_relative_step * peak / dmax});
    Components trial;
    double j1 = std::numeric_limits<double>::infinity();
    for (;;) {
      trial = u;
      for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t jn = 0; jn < u[i].size(); ++jn) trial[i][jn] += alpha * d[i][jn];
      j1 = f.reduced(trial);
      if (j1 <= j0 + opt.armijo * alpha * slope) break;
      alpha *= 0.5;
      if (alpha < 1e-16) break;
    }
    if (!(j1 <= j0)) {
      converged = true;  // no representable decrease left
      out.steps = step - 1;
      break;
    }
    absolute(trial);
    scale(trial, f.nehari_factor(trial));
    u = std::move(trial);
    history.push_back(f.reduced(u));
    out.steps = step;
    const auto w = static_cast<std::size_t>(opt.window);
    if (history.size() > w && history[history.size() - 1 - w] - history.back() <= opt.decrease * history.back()) {
      converged = true;
      break;
    }
  }
  if (!converged && opt.decrease > 0.0) throw SolverError("descent hit the step limit without settling");
  check_resolved(u);
  out.energy_descent = f.energy(u);
  if (out.energy_descent <= 0.0) throw SolverError("negative energy: grid too coarse for this lambda");
  if (opt.polish) {
    out.newton_iterations = newton_polish(f, u, opt.newton_tol, opt.newton_max_iter);
    // the polished point must be the same minimizer, not a different critical point
    if (f.energy(u) > out.energy_descent * (1.0 + 1e-6))
      throw SolverError("Newton polish left the descent minimizer");
  }
  out.energy = f.energy(u);
  out.residual = f.relative_residual(u);
  out.u = std::move(u);
  return out;
}

/// Truncated bump (s/(s^2+r^2))^{(N-2)/2} - (s/(s^2+R^2))^{(N-2)/2}.
inline std::vector<double> bump_profile(const RadialGrid& grid, double s) {
  const double a = 0.5 * (static_cast<double>(grid.dimension()) - 2.0);
  const double tail = std::pow(s / (s * s + grid.radius() * grid.radius()), a);
  std::vector<double> v(static_cast<std::size_t>(grid.size()));
  for (int j = 0; j < grid.size(); ++j) {
    const double r = grid.node(j);
    v[static_cast<std::size_t>(j)] = std::pow(s / (s * s + r * r), a) - tail;
  }
  return v;
}

/// Starting field with every component proportional to one radial profile:
/// the first eigenfunction or a truncated bump, whichever has the lower
/// reduced energy. The bump scale is the largest-scale local minimum of the
/// reduced energy along the bump family, scanned from R downwards. Smaller
/// scales are ignored on purpose: below a few dozen cells the discrete energy
/// falls off toward the grid-scale spike at the origin, which is not a PDE
/// solution.
inline Components best_start(const CoupledFunctional& f, std::span<const double> weights) {
  const auto& grid = *f.grid();
  auto spread = [&](const std::vector<double>& prof) {
    Components u;
    for (double w : weights) {
      auto c = prof;
      for (double& v : c) v *= w;
      u.push_back(std::move(c));
    }
    return u;
  };
  auto cost = [&](double log_s) { return f.reduced(spread(bump_profile(grid, std::exp(log_s)))); };
  const double lo = std::log(24.0 * grid.step());
  const double hi = std::log(grid.radius());
  Components best = spread(first_eigenpair(grid).vector);
  double best_j = f.reduced(best);
  if (lo < hi) {
    const double dx = std::log(0.9);
    const int samples = static_cast<int>(std::floor((lo - hi) / dx));
    std::vector<double> xs, js;
    for (int m = 0; m <= samples; ++m) {
      xs.push_back(hi + dx * m);
      js.push_back(cost(xs.back()));
    }
    std::size_t arg = js.size() - 1;
    for (std::size_t m = 1; m + 1 < js.size(); ++m)
      if (js[m] < js[m - 1] && js[m] <= js[m + 1]) {
        arg = m;
        break;
      }
    double a = xs[std::min(arg + 1, xs.size() - 1)];
    double b = xs[arg == 0 ? 0 : arg - 1];
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = cost(x1), f2 = cost(x2);
    for (int it = 0; it < 40; ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - g * (b - a);
        f1 = cost(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + g * (b - a);
        f2 = cost(x2);
      }
    }
    const double xm = 0.5 * (a + b);
    if (cost(xm) < best_j) {
      best = spread(bump_profile(grid, std::exp(xm)));
      best_j = f.reduced(best);
    }
  }
  return best;
}

}  // namespace cnls
