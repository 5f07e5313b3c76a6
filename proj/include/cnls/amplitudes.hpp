#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cnls/error.hpp"
#include "cnls/model.hpp"

namespace cnls {

/// A point of the amplitude space with its diagnostics recomputed from t.
struct AmplitudeVector {
  std::vector<double> t;
  double kkt_residual = std::numeric_limits<double>::infinity();  // max_i |f_i(t)|
  double g_value = 0.0;
  double p_value = 0.0;
  bool on_p = false;
  int iterations = 0;

  double norm2() const { return std::inner_product(t.begin(), t.end(), t.begin(), 0.0); }
};

namespace amp_detail {

inline std::vector<double> powers(const ProblemSpec& spec, std::span<const double> t) {
  std::vector<double> a(t.size());
  const double p = spec.p();
  for (std::size_t i = 0; i < t.size(); ++i) a[i] = std::pow(std::abs(t[i]), p);
  return a;
}

/// (R a)_i with a_i = |t_i|^p.
inline std::vector<double> coupled(const ProblemSpec& spec, std::span<const double> a) {
  const auto& r = spec.coupling();
  std::vector<double> out(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      out[i] += r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * a[j];
  return out;
}

inline double sum_squares(std::span<const double> t) {
  return std::inner_product(t.begin(), t.end(), t.begin(), 0.0);
}

}  // namespace amp_detail

/// sum_i mu_i |t_i|^{2p} + sum_{i<j} 2 beta_ij |t_i|^p |t_j|^p.
inline double coupling_energy(const ProblemSpec& spec, std::span<const double> t) {
  const auto a = amp_detail::powers(spec, t);
  const auto ra = amp_detail::coupled(spec, a);
  return std::inner_product(a.begin(), a.end(), ra.begin(), 0.0);
}

inline std::vector<double> coupling_energy_gradient(const ProblemSpec& spec,
                                                    std::span<const double> t) {
  const double p = spec.p();
  const auto a = amp_detail::powers(spec, t);
  const auto ra = amp_detail::coupled(spec, a);
  std::vector<double> g(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double ti = t[i];
    g[i] = ti == 0.0 ? 0.0 : 2.0 * p * std::copysign(std::pow(std::abs(ti), p - 1.0), ti) * ra[i];
  }
  return g;
}

inline double eval_G(const ProblemSpec& spec, std::span<const double> t) {
  return 0.5 * amp_detail::sum_squares(t) - coupling_energy(spec, t) / spec.critical_exponent();
}

inline double eval_P(const ProblemSpec& spec, std::span<const double> t) {
  return amp_detail::sum_squares(t) - coupling_energy(spec, t);
}

inline std::vector<double> grad_G(const ProblemSpec& spec, std::span<const double> t) {
  auto g = coupling_energy_gradient(spec, t);
  const double q = spec.critical_exponent();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = t[i] - g[i] / q;
  return g;
}

inline std::vector<double> grad_P(const ProblemSpec& spec, std::span<const double> t) {
  auto g = coupling_energy_gradient(spec, t);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = 2.0 * t[i] - g[i];
  return g;
}

/// Scale s > 0 with s t on P_k, from s^{2p-2} = |t|^2 / D(t).
inline double project_to_P(const ProblemSpec& spec, std::span<const double> t) {
  const double num = amp_detail::sum_squares(t);
  const double den = coupling_energy(spec, t);
  if (!(num > 0.0) || !(den > 0.0) || !std::isfinite(den))
    throw DomainError("degenerate direction: cannot scale onto P_k");
  return std::pow(num / den, 1.0 / (2.0 * spec.p() - 2.0));
}

/// f_i(t) = mu_i t_i^{2p-2} + sum_{j != i} beta_ij t_i^{p-2} t_j^p - 1 for t > 0.
inline std::vector<double> kkt_residuals(const ProblemSpec& spec, std::span<const double> t) {
  const double p = spec.p();
  const auto a = amp_detail::powers(spec, t);
  const auto ra = amp_detail::coupled(spec, a);
  std::vector<double> f(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) f[i] = std::pow(t[i], p - 2.0) * ra[i] - 1.0;
  return f;
}

/// Jacobian of the f_i above.
inline Eigen::MatrixXd kkt_jacobian(const ProblemSpec& spec, std::span<const double> t) {
  const double p = spec.p();
  const auto& r = spec.coupling();
  const auto k = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd jac(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double ti = t[static_cast<std::size_t>(i)];
    double cross = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (j == i) continue;
      const double tj = t[static_cast<std::size_t>(j)];
      cross += r(i, j) * std::pow(tj, p);
      jac(i, j) = p * r(i, j) * std::pow(ti, p - 2.0) * std::pow(tj, p - 1.0);
    }
    jac(i, i) = (2.0 * p - 2.0) * r(i, i) * std::pow(ti, 2.0 * p - 3.0) +
                (p - 2.0) * std::pow(ti, p - 3.0) * cross;
  }
  return jac;
}

/// Recomputes every diagnostic of t.
inline AmplitudeVector make_amplitudes(const ProblemSpec& spec, std::vector<double> t,
                                       int iterations = 0) {
  AmplitudeVector out;
  out.t = std::move(t);
  out.iterations = iterations;
  out.g_value = eval_G(spec, out.t);
  out.p_value = eval_P(spec, out.t);
  const double n2 = out.norm2();
  out.on_p = n2 > 0.0 && std::abs(out.p_value) <= spec.tolerances().constraint * n2 * 10.0;
  bool positive = true;
  for (double v : out.t) positive = positive && v > 0.0;
  if (positive) {
    double m = 0.0;
    for (double f : kkt_residuals(spec, out.t)) m = std::max(m, std::abs(f));
    out.kkt_residual = m;
  }
  return out;
}

namespace amp_detail {

inline double residual_norm(const ProblemSpec& spec, std::span<const double> t) {
  double s = 0.0;
  for (double f : kkt_residuals(spec, t)) s += f * f;
  return std::sqrt(s);
}

inline double residual_max(const ProblemSpec& spec, std::span<const double> t) {
  double m = 0.0;
  for (double f : kkt_residuals(spec, t)) m = std::max(m, std::abs(f));
  return m;
}

constexpr double kFloor = 1e-14;

}  // namespace amp_detail

/// Damped Newton on f(t) = 0 from a positive start.
///
/// Steps are halved until the residual norm decreases (at most 30 times);
/// when that fails the iterate is perturbed and Newton restarts.
inline AmplitudeVector solve_kkt(const ProblemSpec& spec, std::span<const double> t0) {
  using amp_detail::kFloor;
  const auto& tol = spec.tolerances();
  const std::size_t k = t0.size();
  if (static_cast<int>(k) != spec.components())
    throw DomainError("initial amplitude vector has the wrong length");
  std::vector<double> t(t0.begin(), t0.end());
  for (double& v : t) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError("Newton start must be positive");
    v = std::max(v, kFloor);
  }
  std::mt19937_64 rng(tol.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> jitter(-0.25, 0.25);

  int iterations = 0;
  int restarts = 0;
  double fnorm = amp_detail::residual_norm(spec, t);
  while (iterations < tol.newton_max_iter) {
    if (amp_detail::residual_max(spec, t) <= tol.newton) break;
    ++iterations;
    const auto f = kkt_residuals(spec, t);
    const Eigen::MatrixXd jac = kkt_jacobian(spec, t);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) rhs[static_cast<Eigen::Index>(i)] = -f[i];
    const Eigen::VectorXd step = jac.fullPivLu().solve(rhs);
    bool accepted = false;
    double scale = 1.0;
    std::vector<double> trial(k);
    for (int halving = 0; halving <= 30 && step.allFinite(); ++halving, scale *= 0.5) {
      for (std::size_t i = 0; i < k; ++i)
        trial[i] = std::max(t[i] + scale * step[static_cast<Eigen::Index>(i)], kFloor);
      const double tn = amp_detail::residual_norm(spec, trial);
      if (std::isfinite(tn) && tn < fnorm) {
        t = trial;
        fnorm = tn;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (++restarts > 8) throw SolverError("amplitude Newton: no descent after repeated restarts");
      for (double& v : t) v = std::max(v * (1.0 + jitter(rng)), 1e-3);
      fnorm = amp_detail::residual_norm(spec, t);
    }
  }
  const double rmax = amp_detail::residual_max(spec, t);
  if (!(rmax <= tol.newton))
    throw SolverError("amplitude Newton did not converge in " + std::to_string(tol.newton_max_iter) +
                      " iterations (residual " + std::to_string(rmax) + ")");
  for (double v : t)
    if (v <= 1e3 * kFloor) throw SolverError("amplitude Newton left the positive orthant");
  return make_amplitudes(spec, std::move(t), iterations);
}

struct DkResult {
  double value = 0.0;                           // d_k = min (1/N) |t|^2 over P_k
  AmplitudeVector argmin;                       // lexicographically first minimizer
  std::vector<std::vector<double>> minimizers;  // distinct minimizers within 1e-10
  std::vector<std::vector<double>> critical_points;  // distinct converged KKT roots
  int converged_runs = 0;
  int total_runs = 0;
};

namespace amp_detail {

/// Maximizes D(x) over the positive part of the unit sphere by projected
/// gradient ascent with backtracking. The maximizer gives the closest point
/// of P_k to the origin along its ray.
inline std::vector<double> ascend_on_sphere(const ProblemSpec& spec, std::vector<double> x) {
  const double q = spec.critical_exponent();
  auto normalize = [](std::vector<double>& v) {
    const double n = std::sqrt(sum_squares(v));
    for (double& e : v) e /= n;
  };
  normalize(x);
  double value = coupling_energy(spec, x);
  double step = 0.1;
  for (int it = 0; it < 5000; ++it) {
    auto g = coupling_energy_gradient(spec, x);
    for (std::size_t i = 0; i < x.size(); ++i) g[i] -= q * value * x[i];
    const double gg = sum_squares(g);
    if (gg <= 1e-30 * value * value) break;
    bool moved = false;
    std::vector<double> trial(x.size());
    for (int h = 0; h < 60; ++h, step *= 0.5) {
      for (std::size_t i = 0; i < x.size(); ++i) trial[i] = std::max(x[i] + step * g[i], 1e-300);
      normalize(trial);
      const double tv = coupling_energy(spec, trial);
      if (tv >= value + 1e-4 * step * gg) {
        moved = tv > value;
        x = trial;
        value = tv;
        break;
      }
    }
    if (!moved) break;
    step *= 2.0;
  }
  return x;
}

inline bool lex_less(const std::vector<double>& a, const std::vector<double>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

inline void insert_distinct(std::vector<std::vector<double>>& set, const std::vector<double>& t) {
  for (const auto& s : set) {
    double d = 0.0, n = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      d += (s[i] - t[i]) * (s[i] - t[i]);
      n += t[i] * t[i];
    }
    if (d <= 1e-14 * n) return;
  }
  set.push_back(t);
}

}  // namespace amp_detail

/// d_k by multi-start: every start direction is pushed to a local maximizer of
/// D on the sphere, scaled onto P_k, and polished by solve_kkt.
inline DkResult minimize_dk(const ProblemSpec& spec) {
  const auto& tol = spec.tolerances();
  const int k = spec.components();
  const double n = static_cast<double>(spec.dimension());
  const auto ku = static_cast<std::size_t>(k);

  std::vector<std::vector<double>> starts;
  for (int i = 0; i < k; ++i) {
    std::vector<double> e(ku, 1e-3);  // boundary starts nudged inward
    e[static_cast<std::size_t>(i)] = 1.0;
    starts.push_back(std::move(e));
  }
  starts.emplace_back(ku, 1.0);
  std::mt19937_64 rng(tol.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int s = 0; s < tol.starts; ++s) {
    std::vector<double> d(ku);
    for (double& v : d) v = 1e-3 + uni(rng);
    starts.push_back(std::move(d));
  }

  struct Candidate {
    double value;
    std::vector<double> t;
  };
  std::vector<Candidate> found;
  DkResult out;
  out.total_runs = static_cast<int>(starts.size());
  for (const auto& start : starts) {
    const auto x = amp_detail::ascend_on_sphere(spec, start);
    const double s = project_to_P(spec, x);
    std::vector<double> t(ku);
    for (std::size_t i = 0; i < ku; ++i) t[i] = s * x[i];
    try {
      auto polished = solve_kkt(spec, t);
      found.push_back({polished.norm2() / n, polished.t});
      amp_detail::insert_distinct(out.critical_points, polished.t);
      ++out.converged_runs;
    } catch (const SolverError&) {
      // a start whose basin leads to the boundary contributes nothing
    }
  }
  if (found.empty()) throw SolverError("minimize_dk: no start converged");

  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : found) best = std::min(best, c.value);
  for (const auto& c : found)
    if (c.value <= best + 1e-10) amp_detail::insert_distinct(out.minimizers, c.t);
  std::sort(out.minimizers.begin(), out.minimizers.end(), amp_detail::lex_less);
  std::sort(out.critical_points.begin(), out.critical_points.end(), amp_detail::lex_less);
  out.value = best;
  out.argmin = make_amplitudes(spec, out.minimizers.front());
  // value reported from the lexicographic representative
  out.value = out.argmin.norm2() / n;
  return out;
}

/// Grid oracle for d_k: hyperspherical angles on the positive orthant, m points
/// per angle including the coordinate axes, each direction scaled onto P_k in
/// closed form. Cost m^{k-1}.
inline double brute_force_dk(const ProblemSpec& spec, int m) {
  const int k = spec.components();
  if (k > 4) throw DomainError("brute_force_dk: dimension too large (k <= 4)");
  if (m < 2 || m > 200) throw DomainError("brute_force_dk: resolution must lie in [2, 200]");
  const double n = static_cast<double>(spec.dimension());
  const double expo = -1.0 / (spec.p() - 1.0);
  const auto ku = static_cast<std::size_t>(k);
  if (k == 1) return std::pow(coupling_energy(spec, std::vector<double>{1.0}), expo) / n;

  const int angles = k - 1;
  std::vector<int> idx(static_cast<std::size_t>(angles), 0);
  std::vector<double> x(ku);
  const double dtheta = 0.5 * std::numbers::pi / static_cast<double>(m - 1);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    double sin_prod = 1.0;
    for (int a = 0; a < angles; ++a) {
      const double th = dtheta * idx[static_cast<std::size_t>(a)];
      x[static_cast<std::size_t>(a)] = sin_prod * std::cos(th);
      sin_prod *= std::sin(th);
    }
    x[ku - 1] = sin_prod;
    for (double& v : x) v = std::max(v, 0.0);
    const double dval = coupling_energy(spec, x);
    if (dval > 0.0) best = std::min(best, std::pow(dval, expo) / n);
    int a = 0;
    while (a < angles && ++idx[static_cast<std::size_t>(a)] == m) idx[static_cast<std::size_t>(a++)] = 0;
    if (a == angles) break;
  }
  return best;
}

struct DkChain {
  std::vector<double> d;                    // d_tau, tau = 1..k
  std::vector<std::vector<int>> subsets;    // subset attaining each d_tau
  std::vector<double> margins;              // d_{tau-1} - d_tau, tau = 2..k
};

/// All index subsets of {0..k-1} of the given size, in lexicographic order.
inline std::vector<std::vector<int>> subsets_of_size(int k, int size) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<std::size_t>(size));
  std::iota(cur.begin(), cur.end(), 0);
  if (size == 0 || size > k) return out;
  while (true) {
    out.push_back(cur);
    int i = size - 1;
    while (i >= 0 && cur[static_cast<std::size_t>(i)] == k - size + i) --i;
    if (i < 0) break;
    ++cur[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < size; ++j)
      cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

/// d_tau for every sub-system size and the strict chain d_k < ... < d_1.
inline DkChain verify_dk_monotone(const ProblemSpec& spec) {
  const int k = spec.components();
  DkChain chain;
  for (int tau = 1; tau <= k; ++tau) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> arg;
    for (const auto& s : subsets_of_size(k, tau)) {
      const double v = minimize_dk(spec.restricted(s)).value;
      if (v < best) {
        best = v;
        arg = s;
      }
    }
    chain.d.push_back(best);
    chain.subsets.push_back(arg);
  }
  for (int tau = 2; tau <= k; ++tau) {
    const double margin = chain.d[static_cast<std::size_t>(tau - 2)] - chain.d[static_cast<std::size_t>(tau - 1)];
    chain.margins.push_back(margin);
    if (!(margin >= spec.tolerances().strict)) {
      throw StrictnessViolation("d_" + std::to_string(tau), "d_" + std::to_string(tau - 1), margin,
                                "d_" + std::to_string(tau) + " < d_" + std::to_string(tau - 1) +
                                    " not resolved: margin " + std::to_string(margin));
    }
  }
  return chain;
}

}  // namespace cnls
