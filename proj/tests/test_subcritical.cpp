#include <gtest/gtest.h>

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>

#include "cnls/radial/subcritical.hpp"

using namespace cnls;

namespace {

ProblemSpec ball(std::vector<double> mu, std::vector<double> beta, int nodes = 2000) {
  Tolerances t;
  t.grid_nodes = nodes;
  return ProblemSpec::from_upper(5, std::vector<double>(mu.size(), 0.0), mu, beta, DomainMode::ball, 1.0, t);
}

// Least energy of -Lap u = u^{q-1} in B(0,1): shoot v(0) = 1 to its first
// zero r0; u(r) = a v(a^{(q-2)/2} r) with a = r0^{2/(q-2)}, and on the Nehari
// manifold E = (1/2 - 1/q) int u^q.
double lane_emden_energy(double q, int n = 5) {
  namespace ode = boost::numeric::odeint;
  using State = std::array<double, 3>;
  auto rhs = [&](const State& s, State& d, double r) {
    const double u = std::max(s[0], 0.0);
    d[0] = s[1];
    d[1] = -(n - 1.0) / r * s[1] - std::pow(u, q - 1.0);
    d[2] = std::pow(u, q) * std::pow(r, n - 1.0);
  };
  const double r0 = 1e-6;
  State s{1.0 - r0 * r0 / (2.0 * n), -r0 / n, 0.0};
  auto st = ode::make_dense_output(1e-13, 1e-13, ode::runge_kutta_dopri5<State>());
  st.initialize(s, r0, 1e-6);
  while (st.current_state()[0] > 0.0) st.do_step(rhs);
  double lo = st.previous_time(), hi = st.current_time();
  State x;
  for (int i = 0; i < 100; ++i) {
    const double m = 0.5 * (lo + hi);
    st.calc_state(m, x);
    (x[0] > 0.0 ? lo : hi) = m;
  }
  st.calc_state(lo, x);
  const double b = 0.5 * (q - 2.0);
  const double a = std::pow(lo, 1.0 / b);
  return (0.5 - 1.0 / q) * unit_sphere_area(n) * std::pow(a, q - b * n) * x[2];
}

}  // namespace

TEST(Subcritical, ScalarMatchesShooting) {
  for (double eps : {0.2, 0.05}) {
    const SubcriticalSpec sub(ball({1.0}, {}), eps);
    const auto r = solve_coupled_subcritical(sub);
    const double exact = lane_emden_energy(sub.exponent());
    EXPECT_LE(std::abs(r.energy - exact) / exact, 1e-4) << eps;
    EXPECT_LE(r.residual, 1e-10);
  }
}

TEST(Subcritical, ScalarIsPositiveAndDecreasing) {
  const auto r = solve_coupled_subcritical(SubcriticalSpec(ball({1.0}, {}), 0.2));
  const auto& u = r.field.component(0);
  EXPECT_EQ(r.peak, u.front());
  for (std::size_t j = 1; j < u.size(); ++j) {
    EXPECT_GT(u[j], 0.0);
    EXPECT_LT(u[j], u[j - 1]);
  }
  ASSERT_EQ(r.norms.size(), 1u);
  EXPECT_GT(r.norms[0], 0.0);
}

TEST(Subcritical, SymmetricPairIsSynchronized) {
  const SubcriticalSpec sub(ball({1.0, 1.0}, {1.0}), 0.2);
  const auto r = solve_coupled_subcritical(sub);
  const auto& a = r.field.component(0);
  const auto& b = r.field.component(1);
  for (std::size_t j = 0; j < a.size(); ++j) EXPECT_NEAR(a[j] / b[j], 1.0, 1e-8);
  // u_i = t w with (1 + beta) t^{q-2} = 1, so A = 2 (1 + beta)^{-2/(q-2)} C
  const double q = sub.exponent();
  const double c = solve_coupled_subcritical(SubcriticalSpec(ball({1.0}, {}), 0.2)).energy;
  EXPECT_NEAR(r.energy, 2.0 * std::pow(2.0, -2.0 / (q - 2.0)) * c, 1e-8 * r.energy);
}

TEST(Subcritical, BelowSemitrivialLevels) {
  const SubcriticalSpec sub(ball({1.0, 2.0, 3.0}, {0.5, 0.5, 0.5}), 0.2);
  const auto r = solve_coupled_subcritical(sub);
  const auto levels = semitrivial_levels(sub);
  ASSERT_EQ(levels.size(), 3u);
  for (double l : levels) EXPECT_LT(r.energy, l);
  for (double n : r.norms) EXPECT_GT(n, 0.0);
  EXPECT_TRUE(semitrivial_levels(SubcriticalSpec(ball({1.0}, {}), 0.2)).empty());
  EXPECT_THROW(semitrivial_levels(SubcriticalSpec(ball({1, 1, 1, 1}, {1, 1, 1, 1, 1, 1}), 0.2)), DomainError);
}

TEST(Subcritical, SweepIsOrderedAndMatchesColdStarts) {
  const auto base = ball({1.0, 1.0}, {1.0});
  const auto sweep = eps_sweep(base, {0.05, 0.2, 0.1});
  ASSERT_EQ(sweep.size(), 3u);
  EXPECT_EQ(sweep[0].epsilon, 0.2);
  EXPECT_EQ(sweep[2].epsilon, 0.05);
  for (std::size_t i = 1; i < sweep.size(); ++i) EXPECT_LT(sweep[i].energy, sweep[i - 1].energy);
  const auto cold = solve_coupled_subcritical(SubcriticalSpec(base, 0.1));
  EXPECT_NEAR(sweep[1].energy, cold.energy, 1e-8 * cold.energy);
}

TEST(Subcritical, NeedsZeroLambda) {
  const auto spec = ball({1.0}, {}).with_lambda({-1.0});
  EXPECT_THROW(solve_coupled_subcritical(SubcriticalSpec(spec, 0.2)), DomainError);
}

TEST(Blowup, UnitPeakIsTheIdentity) {
  auto grid = make_grid(1.0, 100, 5);
  std::vector<double> u(static_cast<std::size_t>(grid->size()));
  for (int j = 0; j < grid->size(); ++j) u[static_cast<std::size_t>(j)] = 1.0 - grid->node(j) * grid->node(j);
  const VectorField f(grid, {u});
  const auto r = blowup_rescale(f, 0.7);
  for (int j = 0; j < grid->size(); ++j) {
    EXPECT_EQ(r.grid()->node(j), grid->node(j));
    EXPECT_EQ(r.component(0)[static_cast<std::size_t>(j)], u[static_cast<std::size_t>(j)]);
  }
}

TEST(Blowup, UndoesTheInstantonScaling) {
  // U_eps(0) = c eps^{-(N-2)/2}, c = (N(N-2))^{(N-2)/4}; with alpha = 2/(N-2)
  // the rescaled bubble is U_{e0} / U_{e0}(0) with e0 = c^{2/(N-2)}
  const double eps = 0.05;
  const double c = std::pow(15.0, 0.75);
  const InstantonParams small(eps, 5), target(std::pow(c, 2.0 / 3.0), 5);
  auto grid = make_grid(1.0, 400, 5);
  std::vector<double> u(static_cast<std::size_t>(grid->size()));
  for (int j = 0; j < grid->size(); ++j) u[static_cast<std::size_t>(j)] = eval_instanton(small, grid->node(j));
  const auto r = blowup_rescale(VectorField(grid, {u}), 2.0 / 3.0);
  const double k = c * std::pow(eps, -1.5);
  EXPECT_NEAR(u.front(), k, 1e-12 * k);
  EXPECT_NEAR(r.grid()->radius(), std::pow(k, 2.0 / 3.0), 1e-12 * r.grid()->radius());
  const double top = eval_instanton(target, 0.0);
  for (int j = 0; j < grid->size(); j += 7)
    EXPECT_NEAR(r.component(0)[static_cast<std::size_t>(j)], eval_instanton(target, r.grid()->node(j)) / top, 1e-13);
  EXPECT_THROW(blowup_rescale(VectorField(grid, {std::vector<double>(u.size(), 0.0)}), 0.5), DomainError);
}

TEST(Blowup, RescaledSolutionsApproachTheInstanton) {
  const auto base = ball({1.0, 2.0, 3.0}, {0.5, 0.5, 0.5});
  double prev = INFINITY;
  for (double eps : {0.2, 0.1, 0.05}) {
    const SubcriticalSpec sub(base, eps);
    const auto r = solve_coupled_subcritical(sub);
    const auto scaled = blowup_rescale(r.field, sub);
    double top = 0.0;
    for (int i = 0; i < scaled.components(); ++i) top = std::max(top, scaled.component(i).front());
    EXPECT_DOUBLE_EQ(top, 1.0);
    EXPECT_GT(scaled.grid()->radius(), 1.0);
    const auto cmp = compare_to_instanton(scaled, base);
    EXPECT_LT(cmp.distance, prev) << eps;
    prev = cmp.distance;
    ASSERT_EQ(cmp.amplitudes.size(), 3u);
  }
  EXPECT_LT(prev, 0.03);
}

TEST(Blowup, ExactInstantonHasZeroDistance) {
  // a field that is already the normalized synchronized instanton
  const auto base = ball({1.0, 1.0}, {1.0});
  auto grid = make_grid(50.0, 4000, 5);
  const auto ref = compare_to_instanton(
      VectorField(grid, {std::vector<double>(static_cast<std::size_t>(grid->size()), 0.0),
                         std::vector<double>(static_cast<std::size_t>(grid->size()), 0.0)}),
      base);
  const InstantonParams prm(ref.scale, 5);
  Components comps(2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < grid->size(); ++j)
      comps[static_cast<std::size_t>(i)].push_back(ref.amplitudes[static_cast<std::size_t>(i)] * eval_instanton(prm, grid->node(j)));
  EXPECT_NEAR(comps[0].front(), 1.0, 1e-12);
  EXPECT_LE(compare_to_instanton(VectorField(grid, comps), base).distance, 1e-12);
  EXPECT_NEAR(ref.distance, 1.0, 1e-12);
}
