#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "cnls/amplitudes.hpp"
#include "cnls/error.hpp"
#include "cnls/instanton.hpp"
#include "cnls/model.hpp"
#include "cnls/radial/bn.hpp"

namespace cnls {

/// "B[1,3]" for the sub-system on components 1 and 3 (1-based).
inline std::string subset_label(const std::vector<int>& s) {
  std::string out = "B[";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i] + 1);
  return out + "]";
}

struct SubsystemEntry {
  std::vector<int> subset;  // 0-based component indices
  int tau = 0;
  double d = 0.0;           // d_tau of the restricted coupling
  double energy = 0.0;      // d_tau S_lambda^{N/2}
};

struct ChainLink {
  std::string lower;  // the quantity that must be strictly smaller
  std::string upper;
  double margin = 0.0;
  bool pass = false;
};

struct LadderReport {
  std::vector<SubsystemEntry> table;  // subsets by size, lexicographic within a size
  std::vector<double> bbar;           // Bbar_tau, tau = 1..k
  std::vector<std::vector<int>> bbar_subsets;
  std::vector<ChainLink> minimum_chain;  // B < Bbar_{k-1} < ... < Bbar_1
  std::vector<ChainLink> nested_chain;   // B[1..k] < B[1..k-1] < ... < B[1]
  double lambda = 0.0;
  double s_lambda = 0.0;
  double bn_residual = 0.0;
  double strict = 1e-10;

  double energy(const std::vector<int>& subset) const {
    for (const auto& e : table)
      if (e.subset == subset) return e.energy;
    throw DomainError("no ladder entry for " + subset_label(subset));
  }

  /// Rebuilds Bbar and both chains from the table.
  void recompute() {
    int k = 0;
    for (const auto& e : table) k = std::max(k, e.tau);
    bbar.assign(static_cast<std::size_t>(k), std::numeric_limits<double>::infinity());
    bbar_subsets.assign(static_cast<std::size_t>(k), {});
    for (const auto& e : table) {
      const auto t = static_cast<std::size_t>(e.tau - 1);
      if (e.energy < bbar[t]) {
        bbar[t] = e.energy;
        bbar_subsets[t] = e.subset;
      }
    }
    minimum_chain.clear();
    nested_chain.clear();
    auto link = [&](std::string lo, std::string hi, double a, double b) {
      return ChainLink{std::move(lo), std::move(hi), b - a, b - a > strict};
    };
    for (int tau = k; tau >= 2; --tau) {
      const auto t = static_cast<std::size_t>(tau - 1);
      minimum_chain.push_back(link(tau == k ? "B" : "Bbar_" + std::to_string(tau),
                                   "Bbar_" + std::to_string(tau - 1), bbar[t], bbar[t - 1]));
      std::vector<int> big(static_cast<std::size_t>(tau)), small(static_cast<std::size_t>(tau - 1));
      for (int i = 0; i < tau; ++i) big[static_cast<std::size_t>(i)] = i;
      for (int i = 0; i + 1 < tau; ++i) small[static_cast<std::size_t>(i)] = i;
      nested_chain.push_back(link(subset_label(big), subset_label(small), energy(big), energy(small)));
    }
  }

  bool pass() const {
    for (const auto& l : minimum_chain)
      if (!l.pass) return false;
    for (const auto& l : nested_chain)
      if (!l.pass) return false;
    return true;
  }
};

namespace ladder_detail {

inline void require_equal_lambda(const ProblemSpec& spec) {
  if (!spec.equal_lambda())
    throw DomainError("the ladder is computed for equal lambda_i only");
}

/// S_lambda from the mu = 1 scalar problem with the spec's lambda and grid.
inline BnResult unit_bn(const ProblemSpec& spec) {
  Eigen::MatrixXd unit(1, 1);
  unit(0, 0) = 1.0;
  const ProblemSpec scalar(spec.dimension(), {spec.lambda()[0]}, unit, DomainMode::ball,
                           spec.radius(), spec.tolerances());
  return solve_bn(scalar);
}

}  // namespace ladder_detail

/// Energy of every sub-system: d_tau(restricted coupling) S_lambda^{N/2},
/// with one scalar solve for S_lambda shared by all subsets.
inline LadderReport subsystem_energies(const ProblemSpec& spec) {
  ladder_detail::require_equal_lambda(spec);
  const int k = spec.components();
  const auto bn = ladder_detail::unit_bn(spec);
  const double level = std::pow(bn.s_lambda, 0.5 * spec.dimension());

  std::vector<std::vector<int>> subsets;
  for (int tau = 1; tau <= k; ++tau)
    for (auto& s : subsets_of_size(k, tau)) subsets.push_back(std::move(s));
  std::vector<std::future<double>> jobs;
  jobs.reserve(subsets.size());
  for (const auto& s : subsets)
    jobs.push_back(std::async(std::launch::async, [&spec, s] { return minimize_dk(spec.restricted(s)).value; }));

  LadderReport rep;
  rep.lambda = spec.lambda()[0];
  rep.s_lambda = bn.s_lambda;
  rep.bn_residual = bn.residual;
  rep.strict = spec.tolerances().strict;
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    const double d = jobs[i].get();
    rep.table.push_back({subsets[i], static_cast<int>(subsets[i].size()), d, d * level});
  }
  rep.recompute();
  return rep;
}

/// Both strict chains; the first link that is not resolved is reported.
inline LadderReport verify_ladder(const ProblemSpec& spec) {
  auto rep = subsystem_energies(spec);
  for (const auto* chain : {&rep.minimum_chain, &rep.nested_chain})
    for (const auto& l : *chain)
      if (!l.pass)
        throw StrictnessViolation(l.lower, l.upper, l.margin,
                                  l.lower + " < " + l.upper + " not resolved: margin " +
                                      std::to_string(l.margin));
  return rep;
}

struct BaComparison {
  double b = 0.0;       // d_k S_lambda^{N/2}
  double a = 0.0;       // d_k S^{N/2}
  double ratio = 0.0;   // (S_lambda / S)^{N/2}
  double margin = 0.0;  // A - B
  bool pass = false;
  double s_lambda = 0.0;
  double s = 0.0;
};

inline BaComparison compare_B_A(const ProblemSpec& spec) {
  ladder_detail::require_equal_lambda(spec);
  const auto bn = ladder_detail::unit_bn(spec);
  const double dk = minimize_dk(spec).value;
  const double half = 0.5 * spec.dimension();
  BaComparison out;
  out.s_lambda = bn.s_lambda;
  out.s = sobolev_constant(spec.dimension());
  out.b = dk * std::pow(out.s_lambda, half);
  out.a = dk * std::pow(out.s, half);
  out.ratio = std::pow(out.s_lambda / out.s, half);
  out.margin = out.a - out.b;
  out.pass = out.margin > spec.tolerances().strict;
  return out;
}

struct BranchPoint {
  double beta = 0.0;
  std::vector<double> t;        // continuation branch t(beta)
  double sum_sq = 0.0;          // sum_i t_i(beta)^2
  double residual = 0.0;        // max_i |f_i(t(beta), beta)|
  double dk = 0.0;
  std::vector<double> dk_argmin;
  double gap = 0.0;             // (sum_sq / N - d_k) S^{N/2}
};

struct BranchReport {
  std::vector<BranchPoint> points;  // one per requested beta that was reached
  double threshold_level = 0.0;     // min_i mu_i^{-1/(p-1)}
  bool threshold_found = false;     // sum_sq dropped to the level inside the grid
  double threshold_lo = 0.0;        // last grid beta with sum_sq above the level
  double threshold_hi = 0.0;        // first grid beta at or below it
  bool collapse = false;            // branch meets the d_k minimizer (gap within 1e-10)
  bool branch_lost = false;
  double lost_at = 0.0;
  double fold_sigma = 0.0;          // smallest singular value of the Jacobian where it was lost
  std::string message;
  int steps = 0;
};

namespace ladder_detail {

/// The template spec with every beta_ij replaced by b.
inline ProblemSpec with_beta(const ProblemSpec& tmpl, double b) {
  Eigen::MatrixXd c = tmpl.coupling();
  for (Eigen::Index i = 0; i < c.rows(); ++i)
    for (Eigen::Index j = 0; j < c.cols(); ++j)
      if (i != j) c(i, j) = b;
  return tmpl.with_coupling(std::move(c));
}

/// d f / d beta when all beta_ij move together.
inline Eigen::VectorXd beta_derivative(const ProblemSpec& spec, const std::vector<double>& t) {
  const double p = spec.p();
  const auto k = static_cast<Eigen::Index>(t.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      if (i != j)
        out[i] += std::pow(t[static_cast<std::size_t>(i)], p - 2.0) * std::pow(t[static_cast<std::size_t>(j)], p);
  return out;
}

/// Undamped Newton from the predictor. Fails instead of wandering: no
/// restarts, and a corrector that moves far from the predictor is rejected
/// as a jump to another branch.
inline bool correct(const ProblemSpec& spec, std::vector<double>& t) {
  const auto pred = t;
  const double tol = spec.tolerances().newton;
  for (int it = 0; it < 30; ++it) {
    const auto f = kkt_residuals(spec, t);
    double fmax = 0.0;
    for (double v : f) fmax = std::max(fmax, std::abs(v));
    if (!std::isfinite(fmax)) return false;
    if (fmax <= tol) {
      double move = 0.0, size = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i) {
        move = std::max(move, std::abs(t[i] - pred[i]));
        size = std::max(size, std::abs(pred[i]));
      }
      return move <= 0.1 * size;
    }
    const Eigen::MatrixXd jac = kkt_jacobian(spec, t);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) rhs[static_cast<Eigen::Index>(i)] = -f[i];
    const Eigen::VectorXd step = jac.fullPivLu().solve(rhs);
    if (!step.allFinite()) return false;
    for (std::size_t i = 0; i < t.size(); ++i) {
      t[i] += step[static_cast<Eigen::Index>(i)];
      if (!(t[i] > 0.0)) return false;
    }
  }
  return false;
}

}  // namespace ladder_detail

/// Follows the positive solution of the amplitude system that starts at the
/// decoupled point t_i(0) = mu_i^{-1/(2p-2)} as beta grows along `grid`
/// (which must start at 0 and increase). Tangent predictor, Newton corrector;
/// the step starts at 1e-3, doubles after 3 successes, halves on failure and
/// gives up below 1e-6, returning the points reached so far.
inline BranchReport continue_in_beta(const ProblemSpec& tmpl, const std::vector<double>& grid) {
  if (grid.empty() || grid.front() != 0.0) throw DomainError("the beta grid must start at 0");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw DomainError("the beta grid must increase");
  const int k = tmpl.components();
  const double p = tmpl.p();
  const double n = static_cast<double>(tmpl.dimension());
  const double level = std::pow(sobolev_constant(tmpl.dimension()), 0.5 * n);

  BranchReport rep;
  rep.threshold_level = std::numeric_limits<double>::infinity();
  std::vector<double> t(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    t[static_cast<std::size_t>(i)] = std::pow(tmpl.mu(i), -1.0 / (2.0 * p - 2.0));
    rep.threshold_level = std::min(rep.threshold_level, std::pow(tmpl.mu(i), -1.0 / (p - 1.0)));
  }

  auto record = [&](double b) {
    const auto spec = ladder_detail::with_beta(tmpl, b);
    BranchPoint pt;
    pt.beta = b;
    pt.t = t;
    pt.sum_sq = 0.0;
    for (double v : t) pt.sum_sq += v * v;
    for (double f : kkt_residuals(spec, t)) pt.residual = std::max(pt.residual, std::abs(f));
    if (b == 0.0) {
      // decoupled: the infimum sits on the axis of the largest mu, outside
      // the positive cone where minimize_dk looks
      int best = 0;
      for (int i = 1; i < k; ++i)
        if (tmpl.mu(i) > tmpl.mu(best)) best = i;
      pt.dk = rep.threshold_level / n;
      pt.dk_argmin.assign(static_cast<std::size_t>(k), 0.0);
      pt.dk_argmin[static_cast<std::size_t>(best)] = std::sqrt(rep.threshold_level);
    } else {
      const auto dk = minimize_dk(spec);
      pt.dk = dk.value;
      pt.dk_argmin = dk.argmin.t;
    }
    pt.gap = (pt.sum_sq / n - pt.dk) * level;
    if (!rep.points.empty() && !rep.threshold_found && rep.points.back().sum_sq > rep.threshold_level &&
        pt.sum_sq <= rep.threshold_level) {
      rep.threshold_found = true;
      rep.threshold_lo = rep.points.back().beta;
      rep.threshold_hi = b;
    }
    rep.points.push_back(std::move(pt));
  };

  double beta = 0.0;
  double h = 1e-3;
  int streak = 0;
  record(0.0);
  for (std::size_t target = 1; target < grid.size(); ++target) {
    while (beta < grid[target]) {
      const double next = std::min(beta + h, grid[target]);
      const auto at = ladder_detail::with_beta(tmpl, beta);
      // tangent: J dt/dbeta = -df/dbeta
      const Eigen::VectorXd tangent =
          kkt_jacobian(at, t).fullPivLu().solve(-ladder_detail::beta_derivative(at, t));
      auto trial = t;
      bool ok = tangent.allFinite();
      for (std::size_t i = 0; ok && i < trial.size(); ++i) {
        trial[i] += (next - beta) * tangent[static_cast<Eigen::Index>(i)];
        ok = trial[i] > 0.0;
      }
      ok = ok && ladder_detail::correct(ladder_detail::with_beta(tmpl, next), trial);
      ++rep.steps;
      if (ok) {
        t = std::move(trial);
        beta = next;
        if (++streak == 3) {
          h *= 2.0;
          streak = 0;
        }
        continue;
      }
      streak = 0;
      h *= 0.5;
      if (h < 1e-6) {
        rep.branch_lost = true;
        rep.lost_at = beta;
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(kkt_jacobian(ladder_detail::with_beta(tmpl, beta), t));
        rep.fold_sigma = svd.singularValues().minCoeff();
        rep.message = "continuation lost the branch after beta = " + std::to_string(beta) +
                      " (smallest Jacobian singular value " + std::to_string(rep.fold_sigma) +
                      (rep.fold_sigma < 0.1 ? ": fold of the branch)" : ")");
        return rep;
      }
    }
    record(grid[target]);
  }
  const auto& last = rep.points.back();
  rep.collapse = std::abs(last.sum_sq / n - last.dk) <= 1e-10;
  return rep;
}

/// Flat table: subset,tau,energy (subset as 1-based indices joined by spaces).
inline void write_ladder_csv(std::ostream& os, const LadderReport& rep) {
  os << "subset,tau,energy\n";
  char buf[40];
  for (const auto& e : rep.table) {
    std::string s;
    for (std::size_t i = 0; i < e.subset.size(); ++i) s += (i ? " " : "") + std::to_string(e.subset[i] + 1);
    std::snprintf(buf, sizeof buf, "%.17g", e.energy);
    os << s << ',' << e.tau << ',' << buf << '\n';
  }
}

}  // namespace cnls
