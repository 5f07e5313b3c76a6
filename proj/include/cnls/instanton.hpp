#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "cnls/amplitudes.hpp"
#include "cnls/error.hpp"
#include "cnls/model.hpp"
#include "cnls/radial/field.hpp"
#include "cnls/radial/grid.hpp"

namespace cnls {

struct InstantonParams {
  double epsilon = 1.0;
  double center_offset = 0.0;  // |y|; only the radial case y = 0 is integrated
  int dimension = 5;

  InstantonParams(double eps, int n, double offset = 0.0)
      : epsilon(eps), center_offset(offset), dimension(n) {
    if (!(eps > 0.0)) throw DomainError("instanton scale must be positive");
    if (n < 3) throw DomainError("instanton needs dimension >= 3");
  }
};

/// [N(N-2)]^{(N-2)/4}.
inline double instanton_prefactor(int n) {
  const double nd = static_cast<double>(n);
  return std::pow(nd * (nd - 2.0), (nd - 2.0) / 4.0);
}

/// U(r) = [N(N-2)]^{(N-2)/4} (eps/(eps^2 + r^2))^{(N-2)/2}, r measured from y.
inline double eval_instanton(const InstantonParams& prm, double r) {
  const double nd = static_cast<double>(prm.dimension);
  const double e = prm.epsilon;
  return instanton_prefactor(prm.dimension) * std::pow(e / (e * e + r * r), 0.5 * (nd - 2.0));
}

/// dU/dr.
inline double instanton_derivative(const InstantonParams& prm, double r) {
  const double nd = static_cast<double>(prm.dimension);
  const double e = prm.epsilon;
  const double a = 0.5 * (nd - 2.0);
  const double base = e * e + r * r;
  return instanton_prefactor(prm.dimension) * std::pow(e, a) * (-a) * std::pow(base, -a - 1.0) * 2.0 * r;
}

/// Laplacian of U in closed form: U'' + (N-1) U'/r.
inline double instanton_laplacian(const InstantonParams& prm, double r) {
  const double nd = static_cast<double>(prm.dimension);
  const double e = prm.epsilon;
  const double a = 0.5 * (nd - 2.0);
  const double base = e * e + r * r;
  const double c = instanton_prefactor(prm.dimension) * std::pow(e, a);
  // U = c base^{-a}; U'/r = -2a c base^{-a-1}; U'' = -2a c base^{-a-1} + 4a(a+1) c r^2 base^{-a-2}
  const double u_over_r = -2.0 * a * c * std::pow(base, -a - 1.0);
  const double upp = u_over_r + 4.0 * a * (a + 1.0) * c * r * r * std::pow(base, -a - 2.0);
  return upp + (nd - 1.0) * u_over_r;
}

struct QuadratureSpec {
  double rel_tol = 1e-13;
  double cut_factor = 1e3;  // panels on [0, cut_factor * eps], tail beyond
  unsigned max_depth = 15;
};

namespace inst_detail {

/// Adaptive G7-K15 on [a, b]; the error estimate is accumulated into err.
/// Boost compares unscaled panel errors with scaled tolerances, so every
/// piece is mapped onto [0, 1] first; otherwise short panels (the tail) are
/// refined to the depth limit and report inflated errors.
template <class F>
double kronrod(F&& f, double a, double b, const QuadratureSpec& q, double& err) {
  double e = 0.0;
  const double w = b - a;
  auto unit = [&](double s) { return w * f(a + w * s); };
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      unit, 0.0, 1.0, q.max_depth, q.rel_tol, &e);
  if (!std::isfinite(v)) throw SolverError("quadrature produced a non-finite value");
  err += e;
  return v;
}

}  // namespace inst_detail

/// |S^{N-1}| int_0^inf f(r) r^{N-1} dr for a radial integrand decaying at
/// least like r^{-N-eta}. Panels are geometric on [0, cut]; the tail is mapped
/// by r = 1/u onto (0, 1/cut], where the integrand is bounded.
inline double radial_integral(const std::function<double(double)>& f, int n, double scale,
                              const QuadratureSpec& q = {}) {
  const double nd = static_cast<double>(n);
  auto g = [&](double r) { return f(r) * std::pow(r, nd - 1.0); };
  const double cut = q.cut_factor * scale;
  double err = 0.0;
  double total = inst_detail::kronrod(g, 0.0, scale, q, err);
  for (double lo = scale; lo < cut * (1.0 - 1e-12); lo *= 10.0)
    total += inst_detail::kronrod(g, lo, std::min(lo * 10.0, cut), q, err);
  auto tail = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double r = 1.0 / u;
    return g(r) / (u * u);
  };
  total += inst_detail::kronrod(tail, 0.0, 1.0 / cut, q, err);
  if (err > 10.0 * q.rel_tol * std::abs(total) + std::numeric_limits<double>::min())
    throw SolverError("quadrature not converged: error estimate " + std::to_string(err) +
                      " for integral " + std::to_string(total));
  return unit_sphere_area(n) * total;
}

struct InstantonIntegrals {
  double dirichlet;  // int |grad U|^2
  double critical;   // int U^{2*}
};

inline InstantonIntegrals instanton_integrals(const InstantonParams& prm,
                                              const QuadratureSpec& q = {}) {
  if (prm.center_offset != 0.0) throw DomainError("instanton integrals need the radial case y = 0");
  const int n = prm.dimension;
  const double crit = 2.0 * static_cast<double>(n) / static_cast<double>(n - 2);
  const double dir = radial_integral(
      [&](double r) {
        const double d = instanton_derivative(prm, r);
        return d * d;
      },
      n, prm.epsilon, q);
  const double cr = radial_integral([&](double r) { return std::pow(eval_instanton(prm, r), crit); },
                                    n, prm.epsilon, q);
  if (std::abs(dir - cr) > 1e-8 * cr)
    throw SolverError("instanton integrals disagree beyond 1e-8: quadrature not converged");
  return {dir, cr};
}

/// Best Sobolev constant S, from int U^{2*} = S^{N/2}. Values for the
/// default scale and quadrature are memoized per dimension.
inline double sobolev_constant(int n, double epsilon = 1.0, const QuadratureSpec& q = {}) {
  if (n < 3) throw DomainError("Sobolev constant needs N >= 3");
  const bool cacheable = epsilon == 1.0 && q.rel_tol == QuadratureSpec{}.rel_tol &&
                         q.cut_factor == QuadratureSpec{}.cut_factor &&
                         q.max_depth == QuadratureSpec{}.max_depth;
  static std::mutex mtx;
  static std::map<int, double> cache;
  if (cacheable) {
    std::lock_guard lock(mtx);
    if (auto it = cache.find(n); it != cache.end()) return it->second;
  }
  const auto ints = instanton_integrals(InstantonParams(epsilon, n), q);
  const double s = std::pow(ints.critical, 2.0 / static_cast<double>(n));
  if (cacheable) {
    std::lock_guard lock(mtx);
    cache[n] = s;
  }
  return s;
}

/// A = d_k S^{N/2} for the whole-space system.
inline double limit_energy_A(const ProblemSpec& spec) {
  for (double l : spec.lambda())
    if (l != 0.0) throw DomainError("limit energy requires lambda = 0");
  const double s = sobolev_constant(spec.dimension());
  return minimize_dk(spec).value * std::pow(s, 0.5 * spec.dimension());
}

struct LimitSolution {
  VectorField field;                  // t_i U_{eps,0} sampled on a radial grid
  AmplitudeVector amplitudes;
  double residual = 0.0;              // relative max-norm of the PDE residual on [0, 10 eps]
  std::vector<double> residual_by_component;
};

/// Whole-space PDE residual of (t_i U) at radius r, using the closed-form
/// Laplacian: -Lap u_i - mu_i u_i^{2p-1} - sum_{j != i} beta_ij u_i^{p-1} u_j^p.
inline std::vector<double> synchronized_residual(const ProblemSpec& spec,
                                                 std::span<const double> t,
                                                 const InstantonParams& prm, double r) {
  const double p = spec.p();
  const double u = eval_instanton(prm, r);
  const double lap = instanton_laplacian(prm, r);
  const auto& c = spec.coupling();
  const std::size_t k = t.size();
  std::vector<double> res(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double ui = t[i] * u;
    double rhs = c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) * std::pow(ui, 2.0 * p - 1.0);
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      rhs += c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
             std::pow(ui, p - 1.0) * std::pow(t[j] * u, p);
    }
    res[i] = -t[i] * lap - rhs;
  }
  return res;
}

/// (t~_i U_{eps,0}) sampled on [0, sample_radius] with sample_nodes nodes, and
/// its residual against the whole-space system on r in [0, 10 eps].
inline LimitSolution synchronized_limit_solution(const ProblemSpec& spec, const InstantonParams& prm,
                                                 double sample_radius_factor = 200.0,
                                                 int sample_nodes = 4000) {
  for (double l : spec.lambda())
    if (l != 0.0) throw DomainError("synchronized limit solution requires lambda = 0");
  if (prm.dimension != spec.dimension()) throw DomainError("instanton dimension mismatch");
  auto dk = minimize_dk(spec);
  const auto& t = dk.argmin.t;
  const int k = spec.components();
  auto grid = make_grid(sample_radius_factor * prm.epsilon, sample_nodes, spec.dimension());
  std::vector<std::vector<double>> comps(static_cast<std::size_t>(k),
                                         std::vector<double>(static_cast<std::size_t>(grid->size())));
  for (int j = 0; j < grid->size(); ++j) {
    const double u = eval_instanton(prm, grid->node(j));
    for (int i = 0; i < k; ++i)
      comps[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = t[static_cast<std::size_t>(i)] * u;
  }
  // residual on a fine uniform sampling of [0, 10 eps]
  std::vector<double> worst(static_cast<std::size_t>(k), 0.0);
  std::vector<double> scale(static_cast<std::size_t>(k), 0.0);
  const int samples = 2001;
  for (int s = 0; s < samples; ++s) {
    const double r = 10.0 * prm.epsilon * static_cast<double>(s) / static_cast<double>(samples - 1);
    const auto res = synchronized_residual(spec, t, prm, r);
    const double lap = std::abs(instanton_laplacian(prm, r));
    for (std::size_t i = 0; i < res.size(); ++i) {
      worst[i] = std::max(worst[i], std::abs(res[i]));
      scale[i] = std::max(scale[i], t[i] * lap);
    }
  }
  LimitSolution out{VectorField(grid, std::move(comps)), dk.argmin, 0.0, {}};
  for (std::size_t i = 0; i < worst.size(); ++i) {
    out.residual_by_component.push_back(worst[i] / scale[i]);
    out.residual = std::max(out.residual, worst[i] / scale[i]);
  }
  return out;
}

/// I(t_1 U, ..., t_k U) by radial quadrature of the energy density.
inline double synchronized_energy(const ProblemSpec& spec, std::span<const double> t,
                                  const InstantonParams& prm, const QuadratureSpec& q = {}) {
  const double p = spec.p();
  const auto& c = spec.coupling();
  const std::size_t k = t.size();
  auto density = [&](double r) {
    const double u = eval_instanton(prm, r);
    const double du = instanton_derivative(prm, r);
    double grad = 0.0, pot = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      grad += t[i] * t[i] * du * du;
      for (std::size_t j = 0; j < k; ++j)
        pot += c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
               std::pow(t[i] * u, p) * std::pow(t[j] * u, p);
    }
    return 0.5 * grad - pot / (2.0 * p);
  };
  // the density changes sign, so integrate the two parts separately
  auto positive = [&](double r) {
    const double du = instanton_derivative(prm, r);
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += t[i] * t[i];
    return 0.5 * s * du * du;
  };
  const double grad_part = radial_integral(positive, spec.dimension(), prm.epsilon, q);
  const double pot_part =
      radial_integral([&](double r) { return positive(r) - density(r); }, spec.dimension(), prm.epsilon, q);
  return grad_part - pot_part;
}

struct DecayFit {
  double slope = 0.0;
  double constant = 0.0;  // exp(intercept)
  bool pass = false;
  int points = 0;
};

/// Least-squares fit of log sum_i U_i against log(1 + r) on [r_min, r_max];
/// passes when the slope is within 0.1 of 2 - N.
inline DecayFit decay_check(const VectorField& field, double r_min, double r_max) {
  const auto& g = *field.grid();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int cnt = 0;
  for (int j = 0; j < g.size(); ++j) {
    const double r = g.node(j);
    if (r < r_min || r > r_max) continue;
    double total = 0.0;
    for (int i = 0; i < field.components(); ++i) total += field.component(i)[static_cast<std::size_t>(j)];
    if (!(total > 0.0)) throw DomainError("decay_check: field is not positive on the window");
    const double x = std::log1p(r);
    const double y = std::log(total);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  if (cnt < 2) throw DomainError("decay_check: window holds fewer than two nodes");
  const double n = static_cast<double>(cnt);
  DecayFit fit;
  fit.points = cnt;
  const double denom = n * sxx - sx * sx;
  fit.slope = denom == 0.0 ? 0.0 : (n * sxy - sx * sy) / denom;
  fit.constant = std::exp((sy - fit.slope * sx) / n);
  const double target = 2.0 - static_cast<double>(g.dimension());
  fit.pass = std::abs(fit.slope - target) <= 0.1;
  return fit;
}

}  // namespace cnls
