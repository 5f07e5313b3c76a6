#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cnls/amplitudes.hpp"
#include "cnls/config.hpp"
#include "cnls/error.hpp"
#include "cnls/instanton.hpp"
#include "cnls/ladder.hpp"
#include "cnls/model.hpp"
#include "cnls/plot.hpp"
#include "cnls/radial/bn.hpp"
#include "cnls/radial/pohozaev.hpp"
#include "cnls/radial/subcritical.hpp"
#include "cnls/report.hpp"
#include "cnls/validate.hpp"

namespace cnls::cli {

enum Exit : int { ok = 0, validation = 2, nonconvergence = 3, strictness = 4 };

struct Command {
  std::string name;
  std::string spec_path;
  std::string output_dir = ".";
  std::vector<std::string> overrides;  // "key=value", dotted keys reach into tolerances
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  std::string field_path;              // pohozaev: profiles.csv to evaluate instead of solving
  std::vector<double> beta_grid;       // beta-branch: empty = default grid
  std::vector<double> eps;             // eps-sweep: empty = {0.4, 0.2, 0.1, 0.05}
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"amplitudes", "dk-ladder", "instanton",   "bn-solve",
                                                 "sync-solve", "eps-sweep", "pohozaev",    "beta-branch",
                                                 "full-report"};
  return names;
}

inline std::vector<double> default_beta_grid() {
  return {0.0, 1e-3, 2e-3, 5e-3, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0};
}

inline std::vector<double> default_eps() { return {0.4, 0.2, 0.1, 0.05}; }

/// Everything a command produces. The report is always written; the CSV and
/// SVG only when the command fills them.
struct Artifacts {
  EnergyReport report;
  std::string profiles;
  std::string plot;
  std::string ladder_csv;
  std::string summary;
  int status = Exit::ok;
  std::string deferred_error;  // structured error for a partial result
};

namespace detail {

inline std::string g6(double v) { return plot_detail::fmt(v); }

inline std::string csv(const VectorField& f) {
  std::ostringstream os;
  write_csv(os, f);
  return os.str();
}

inline Series profile_series(const VectorField& f, int i, double r_max) {
  Series s{"u_" + std::to_string(i + 1), {}, {}};
  const auto& g = *f.grid();
  const int stride = std::max(1, g.size() / 800);
  for (int j = 0; j < g.size(); j += stride) {
    if (g.node(j) > r_max) break;
    s.x.push_back(g.node(j));
    s.y.push_back(f.component(i)[static_cast<std::size_t>(j)]);
  }
  if (r_max >= g.radius()) {
    s.x.push_back(g.radius());
    s.y.push_back(0.0);
  }
  return s;
}

inline std::string profile_plot(const VectorField& f, const std::string& title, double r_max) {
  std::vector<Series> series;
  for (int i = 0; i < f.components(); ++i) series.push_back(profile_series(f, i, r_max));
  return emit_plot(series, PlotKind::profile, {title, "r", "u(r)", {}, false});
}

inline void require_ball(const ProblemSpec& spec, const char* what) {
  if (spec.mode() != DomainMode::ball) throw DomainError(std::string(what) + " needs mode \"ball\"");
}

// ---- command bodies: each adds entries/verdicts and fills optional files ----

inline void amplitudes(const ProblemSpec& spec, Artifacts& art) {
  auto& rep = art.report;
  const auto dk = minimize_dk(spec);
  rep.add("d_k", dk.value);
  for (std::size_t i = 0; i < dk.argmin.t.size(); ++i) rep.add("t_" + std::to_string(i + 1), dk.argmin.t[i]);
  rep.add("G", dk.argmin.g_value);
  rep.add("P", dk.argmin.p_value);
  rep.add("kkt_residual", dk.argmin.kkt_residual);
  rep.add("critical_points", static_cast<double>(dk.critical_points.size()));
  rep.add("converged_runs", static_cast<double>(dk.converged_runs));
  rep.verdict("kkt_residual", dk.argmin.kkt_residual <= spec.tolerances().newton,
              spec.tolerances().newton - dk.argmin.kkt_residual);
  if (spec.components() <= 3) {
    const double bf = brute_force_dk(spec, 100);
    rep.add("d_k_brute_force", bf, Provenance::oracle, 1e-3);
    rep.verdict("brute_force_agreement", std::abs(bf - dk.value) <= 1e-3, 1e-3 - std::abs(bf - dk.value));
  }
  art.summary += "d_k = " + g6(dk.value) + "\n";
}

inline void dk_ladder(const ProblemSpec& spec, Artifacts& art) {
  auto& rep = art.report;
  const auto chain = verify_dk_monotone(spec);
  for (std::size_t t = 0; t < chain.d.size(); ++t) rep.add("d_" + std::to_string(t + 1), chain.d[t]);
  for (std::size_t t = 0; t < chain.margins.size(); ++t) {
    const auto tau = std::to_string(t + 2);
    rep.add("margin_d_" + tau, chain.margins[t]);
    rep.verdict("d_" + tau + " < d_" + std::to_string(t + 1), true, chain.margins[t]);
  }
  art.summary += "d-chain PASS over " + std::to_string(chain.d.size()) + " levels\n";
}

inline void instanton(const ProblemSpec& spec, Artifacts& art, bool files) {
  auto& rep = art.report;
  const int n = spec.dimension();
  const double s = sobolev_constant(n);
  const double closed = M_PI * n * (n - 2.0) * std::pow(std::tgamma(0.5 * n) / std::tgamma(1.0 * n), 2.0 / n);
  rep.add("S", s);
  rep.add("S_closed_form", closed, Provenance::oracle, 1e-5);
  rep.add("S^{N/2}", std::pow(s, 0.5 * n));
  rep.verdict("S_matches_closed_form", std::abs(s - closed) <= 1e-5, 1e-5 - std::abs(s - closed));
  double worst = 0.0;
  for (double e : {0.1, 1.0, 10.0}) {
    const auto in = instanton_integrals(InstantonParams(e, n), {spec.tolerances().quadrature});
    rep.add("dirichlet_eps=" + g6(e), in.dirichlet);
    rep.add("critical_eps=" + g6(e), in.critical);
    worst = std::max(worst, std::abs(in.dirichlet - in.critical) / in.critical);
    worst = std::max(worst, std::abs(in.dirichlet - std::pow(s, 0.5 * n)) / std::pow(s, 0.5 * n));
  }
  rep.add("scale_invariance_spread", worst);
  rep.verdict("scale_invariance", worst <= 1e-8, 1e-8 - worst);

  const auto limit = spec.with_lambda(std::vector<double>(spec.lambda().size(), 0.0))
                         .with_mode(DomainMode::whole_space, 0.0);
  rep.add("A", limit_energy_A(limit));
  const auto sol = synchronized_limit_solution(limit, InstantonParams(1.0, n));
  rep.add("synchronized_residual", sol.residual);
  rep.verdict("synchronized_residual", sol.residual <= 1e-8, 1e-8 - sol.residual);
  art.summary += "S = " + g6(s) + ", A = " + g6(rep.value("A")) + "\n";
  if (files) {
    art.profiles = csv(sol.field);
    art.plot = profile_plot(sol.field, "synchronized instanton, eps = 1", 10.0);
  }
}

inline void bn_solve(const ProblemSpec& spec, Artifacts& art) {
  require_ball(spec, "bn-solve");
  auto& rep = art.report;
  Components comps;
  GridPtr grid;
  for (int i = 0; i < spec.components(); ++i) {
    const int idx[1] = {i};
    const auto one = spec.restricted(idx);
    if (!grid) grid = spec_grid(one);
    const auto bn = solve_bn(one, grid);
    const auto k = std::to_string(i + 1);
    rep.add("B_mu_" + k, bn.energy);
    rep.add("bound_" + k, bn.bound, Provenance::oracle);
    rep.add("S_lambda_" + k, bn.s_lambda);
    rep.add("residual_" + k, bn.residual);
    rep.verdict("B_mu_" + k + " < bound_" + k, bn.margin > spec.tolerances().strict, bn.margin);
    comps.push_back(bn.omega.component(0));
    art.summary += "B_mu_" + k + " = " + g6(bn.energy) + " (bound " + g6(bn.bound) + ")\n";
  }
  const VectorField f(grid, std::move(comps));
  art.profiles = csv(f);
  art.plot = profile_plot(f, "Brezis-Nirenberg solutions", spec.radius());
}

inline SynchronizedSolution sync_solve(const ProblemSpec& spec, Artifacts& art, bool files) {
  require_ball(spec, "sync-solve");
  auto& rep = art.report;
  auto sol = synchronized_bounded_solution(spec);
  rep.add("B", sol.energy);
  rep.add("d_k_S_lambda^{N/2}", sol.predicted);
  rep.add("sync_relative_gap", sol.relative_gap);
  rep.add("sync_residual", sol.residual);
  rep.add("S_lambda", sol.omega.s_lambda);
  rep.verdict("B = d_k S_lambda^{N/2}", sol.relative_gap <= 1e-6, 1e-6 - sol.relative_gap);
  Eigen::MatrixXd unit(1, 1);
  unit(0, 0) = 1.0;
  const ProblemSpec scalar(spec.dimension(), {spec.lambda()[0]}, unit, DomainMode::ball, spec.radius(),
                           spec.tolerances());
  const auto poh = pohozaev_residual(scalar, sol.omega.omega);
  rep.add("omega_pohozaev_relative", poh.relative);
  art.summary += "B = " + g6(sol.energy) + ", d_k S_lambda^{N/2} = " + g6(sol.predicted) + "\n";
  if (files) {
    art.profiles = csv(sol.field);
    art.plot = profile_plot(sol.field, "synchronized bounded solution", spec.radius());
  }
  return sol;
}

inline void eps_sweep(const ProblemSpec& spec, const std::vector<double>& eps, Artifacts& art) {
  require_ball(spec, "eps-sweep");
  auto& rep = art.report;
  // the regularized ball problem has no lambda term
  const auto base = spec.with_lambda(std::vector<double>(spec.lambda().size(), 0.0));
  const double a = limit_energy_A(base.with_mode(DomainMode::whole_space, 0.0));
  rep.add("A", a);
  const auto sweep = cnls::eps_sweep(base, eps);
  Series curve{"A_eps", {}, {}};
  double prev_gap = INFINITY;
  bool decreasing = true;
  double worst_decrease = INFINITY;
  double last_dist = 0.0;
  for (const auto& r : sweep) {
    const auto tag = "[eps=" + g6(r.epsilon) + "]";
    const double gap = (r.energy - a) / a;
    const auto cmp = compare_to_instanton(blowup_rescale(r.field, SubcriticalSpec(base, r.epsilon)), base);
    rep.add("A_eps" + tag, r.energy);
    rep.add("relative_gap" + tag, gap);
    rep.add("peak" + tag, r.peak);
    rep.add("blowup_distance" + tag, cmp.distance);
    if (std::isfinite(prev_gap)) {
      decreasing = decreasing && std::abs(gap) < std::abs(prev_gap);
      worst_decrease = std::min(worst_decrease, std::abs(prev_gap) - std::abs(gap));
    }
    prev_gap = gap;
    last_dist = cmp.distance;
    curve.x.push_back(r.epsilon);
    curve.y.push_back(r.energy);
  }
  const auto& last = sweep.back();
  const double last_gap = std::abs(last.energy - a) / a;
  rep.verdict("gap_decreasing", decreasing, std::isfinite(worst_decrease) ? worst_decrease : 0.0);
  rep.verdict("A_eps within 5% of A at smallest eps", last_gap <= 0.05, 0.05 - last_gap);
  rep.verdict("blow-up profile within 10% on [0,5]", last_dist <= 0.1, 0.1 - last_dist);
  art.profiles = csv(last.field);
  art.plot = emit_plot({curve}, PlotKind::sweep, {"regularized energies", "eps", "A_eps", {{"A", a}}, true});
  art.summary += "A_eps(" + g6(last.epsilon) + ") = " + g6(last.energy) + ", A = " + g6(a) + "\n";
}

inline void pohozaev(const ProblemSpec& spec, const std::string& field_path, Artifacts& art) {
  require_ball(spec, "pohozaev");
  auto& rep = art.report;
  std::optional<VectorField> field;
  if (!field_path.empty()) {
    std::ifstream in(field_path, std::ios::binary);
    if (!in) throw DomainError("cannot open field file '" + field_path + "'");
    field.emplace(read_csv(in, spec.dimension()));
    if (field->components() != spec.components())
      throw DomainError("field has " + std::to_string(field->components()) + " components, spec has " +
                        std::to_string(spec.components()));
  } else if (spec.components() == 1) {
    field.emplace(solve_bn(spec).omega);
  } else {
    field.emplace(synchronized_bounded_solution(spec).field);
  }
  const auto p = pohozaev_residual(spec, *field);
  rep.add("gradient_term", p.gradient);
  rep.add("boundary_term", p.boundary);
  rep.add("coupling_term", p.coupling);
  rep.add("lambda_term", p.lambda);
  rep.add("absolute_residual", p.absolute);
  rep.add("relative_residual", p.relative);
  rep.add("nonexistence_consistent", p.nonexistence_consistent ? 1.0 : 0.0);
  art.summary += "Pohozaev relative residual " + g6(p.relative) + "\n";
}

inline BranchReport beta_branch(const ProblemSpec& spec, const std::vector<double>& grid, Artifacts& art,
                                bool files) {
  auto& rep = art.report;
  if (spec.components() < 2) throw DomainError("beta-branch needs at least two components");
  const auto tmpl = spec.with_lambda(std::vector<double>(spec.lambda().size(), 0.0))
                        .with_mode(DomainMode::whole_space, 0.0);
  const auto br = continue_in_beta(tmpl, grid);
  double worst_res = 0.0, worst_gap = INFINITY;
  Series sums{"sum t_i^2", {}, {}};
  for (const auto& p : br.points) {
    const auto tag = "[beta=" + g6(p.beta) + "]";
    rep.add("sum_sq" + tag, p.sum_sq);
    rep.add("residual" + tag, p.residual);
    rep.add("d_k" + tag, p.dk);
    rep.add("energy_gap" + tag, p.gap);
    worst_res = std::max(worst_res, p.residual);
    worst_gap = std::min(worst_gap, p.sum_sq / spec.dimension() - p.dk);
    sums.x.push_back(p.beta);
    sums.y.push_back(p.sum_sq);
  }
  rep.add("threshold_level", br.threshold_level);
  if (br.threshold_found) {
    rep.add("threshold_beta_lo", br.threshold_lo);
    rep.add("threshold_beta_hi", br.threshold_hi);
  }
  rep.add("collapse", br.collapse ? 1.0 : 0.0);
  rep.add("continuation_steps", static_cast<double>(br.steps));
  rep.verdict("branch_residual", worst_res <= 1e-10, 1e-10 - worst_res);
  rep.verdict("gap_nonnegative", worst_gap >= -1e-12, worst_gap);
  rep.verdict("branch_complete", !br.branch_lost, br.branch_lost ? br.lost_at : 0.0);
  if (files && sums.x.size() >= 1)
    art.plot = emit_plot({sums}, PlotKind::branch,
                         {"continuation branch", "beta", "sum t_i^2", {{"min mu_i^{-1/(p-1)}", br.threshold_level}}, true});
  art.summary += "branch: " + std::to_string(br.points.size()) + " points" +
                 (br.branch_lost ? ", lost after beta = " + g6(br.lost_at) : "") + "\n";
  return br;
}

inline void full_report(const ProblemSpec& spec, Artifacts& art) {
  auto& rep = art.report;
  amplitudes(spec, art);
  dk_ladder(spec, art);
  instanton(spec, art, false);
  if (spec.mode() == DomainMode::ball && spec.equal_lambda()) {
    const auto ladder = verify_ladder(spec);
    for (const auto& e : ladder.table) rep.add(subset_label(e.subset), e.energy);
    for (std::size_t t = 0; t < ladder.bbar.size(); ++t) rep.add("Bbar_" + std::to_string(t + 1), ladder.bbar[t]);
    for (const auto& l : ladder.minimum_chain) rep.verdict(l.lower + " < " + l.upper, l.pass, l.margin);
    for (const auto& l : ladder.nested_chain) rep.verdict(l.lower + " < " + l.upper, l.pass, l.margin);
    std::ostringstream os;
    write_ladder_csv(os, ladder);
    art.ladder_csv = os.str();
    const auto ba = compare_B_A(spec);
    rep.add("(S_lambda/S)^{N/2}", ba.ratio);
    rep.verdict("B < A", ba.pass, ba.margin);
    sync_solve(spec, art, true);
  }
  if (spec.components() >= 2) {
    double top = 0.0;
    for (int i = 0; i < spec.components(); ++i)
      for (int j = i + 1; j < spec.components(); ++j) top = std::max(top, spec.beta(i, j));
    beta_branch(spec, {0.0, 0.25 * top, 0.5 * top, top}, art, false);
  }
}

inline std::string error_json(const std::string& kind, const std::string& message, int status,
                              const nlohmann::json& extra = nlohmann::json::object()) {
  nlohmann::json j = {{"error", kind}, {"message", message}, {"exit", status}};
  for (const auto& [k, v] : extra.items()) j[k] = v;
  return j.dump();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DomainError("cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw DomainError("failed writing '" + p.string() + "'");
}

}  // namespace detail

/// Loads the spec (overrides and seed applied), validates it, runs the named
/// command and writes report.json plus any CSV/SVG into the output directory.
/// Errors go to `err` as one JSON object. Returns the exit status.
inline int run(const Command& cmd, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using detail::error_json;
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), cmd.name) == names.end()) {
    err << error_json("spec", "unknown command '" + cmd.name + "'", Exit::validation) << '\n';
    return Exit::validation;
  }
  try {
    auto doc = parse_config_text(read_text_file(cmd.spec_path));
    for (const auto& o : cmd.overrides) apply_override(doc, o);
    if (cmd.seed) doc["tolerances"]["seed"] = *cmd.seed;
    const auto spec = spec_from_json(doc);
    const auto valid = validate_spec(spec);
    if (!valid.ok()) {
      nlohmann::json list = nlohmann::json::array();
      for (const auto& v : valid.violations) list.push_back({{"field", v.field}, {"message", v.message}});
      err << error_json("validation", valid.violations.front().message, Exit::validation, {{"violations", list}})
          << '\n';
      return Exit::validation;
    }
    std::error_code ec;
    const std::filesystem::path dir(cmd.output_dir);
    std::filesystem::create_directories(dir, ec);
    if (!std::filesystem::is_directory(dir))
      throw DomainError("output directory '" + cmd.output_dir + "' cannot be created");

    Artifacts art{EnergyReport(cmd.name, spec), {}, {}, {}, {}, Exit::ok, {}};
    for (const auto& w : valid.warnings) art.summary += "warning: " + w + "\n";
    if (cmd.name == "amplitudes") detail::amplitudes(spec, art);
    else if (cmd.name == "dk-ladder") detail::dk_ladder(spec, art);
    else if (cmd.name == "instanton") detail::instanton(spec, art, true);
    else if (cmd.name == "bn-solve") detail::bn_solve(spec, art);
    else if (cmd.name == "sync-solve") detail::sync_solve(spec, art, true);
    else if (cmd.name == "eps-sweep") detail::eps_sweep(spec, cmd.eps.empty() ? default_eps() : cmd.eps, art);
    else if (cmd.name == "pohozaev") detail::pohozaev(spec, cmd.field_path, art);
    else if (cmd.name == "beta-branch") {
      const auto br = detail::beta_branch(spec, cmd.beta_grid.empty() ? default_beta_grid() : cmd.beta_grid, art, true);
      if (br.branch_lost) {
        art.status = Exit::nonconvergence;
        art.deferred_error = error_json("nonconvergence", br.message, Exit::nonconvergence,
                                        {{"branch_lost_at", br.lost_at}, {"points", br.points.size()}});
      }
    } else detail::full_report(spec, art);

    detail::write_file(dir / "report.json", art.report.to_json());
    if (!art.profiles.empty()) detail::write_file(dir / "profiles.csv", art.profiles);
    if (!art.plot.empty()) detail::write_file(dir / "plot.svg", art.plot);
    if (!art.ladder_csv.empty()) detail::write_file(dir / "ladder.csv", art.ladder_csv);
    if (!cmd.quiet) {
      out << cmd.name << ": " << (art.report.all_pass() ? "all verdicts PASS" : "some verdicts FAIL") << '\n'
          << art.summary;
    }
    if (!art.deferred_error.empty()) err << art.deferred_error << '\n';
    return art.status;
  } catch (const StrictnessViolation& e) {
    err << error_json(e.kind(), e.what(), Exit::strictness,
                      {{"lower", e.lower()}, {"upper", e.upper()}, {"margin", e.margin()}})
        << '\n';
    return Exit::strictness;
  } catch (const SpecError& e) {
    err << error_json(e.kind(), e.what(), Exit::validation, {{"field", e.field()}}) << '\n';
    return Exit::validation;
  } catch (const DomainError& e) {
    err << error_json(e.kind(), e.what(), Exit::validation) << '\n';
    return Exit::validation;
  } catch (const SolverError& e) {
    err << error_json(e.kind(), e.what(), Exit::nonconvergence) << '\n';
    return Exit::nonconvergence;
  } catch (const nlohmann::json::exception& e) {
    err << error_json("spec", e.what(), Exit::validation) << '\n';
    return Exit::validation;
  } catch (const std::exception& e) {
    err << error_json("error", e.what(), Exit::nonconvergence) << '\n';
    return Exit::nonconvergence;
  }
}

}  // namespace cnls::cli
