#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cnls/config.hpp"
#include "cnls/model.hpp"
#include "cnls/report.hpp"
#include "cnls/validate.hpp"

using namespace cnls;

namespace {

ProblemSpec ball2() {
  const double mu[] = {1.0, 1.0}, beta[] = {1.0};
  return ProblemSpec::from_upper(5, {-1.0, -1.0}, mu, beta, DomainMode::ball, 1.0);
}

}  // namespace

TEST(Spec, ExponentsFollowDimension) {
  for (int n = 3; n <= 12; ++n) {
    const double mu[] = {1.0};
    const auto s = ProblemSpec::from_upper(n, {-1.0}, mu, {}, DomainMode::ball, 1.0);
    EXPECT_DOUBLE_EQ(s.p() * (n - 2), n);
    EXPECT_DOUBLE_EQ(s.critical_exponent(), 2.0 * n / (n - 2));
  }
}

TEST(Spec, RejectsStructuralNonsense) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_THROW(ProblemSpec(5, {-1.0}, r, DomainMode::ball, 1.0), SpecError);
  EXPECT_THROW(ProblemSpec(2, {-1.0, -1.0}, r, DomainMode::ball, 1.0), SpecError);
  const double mu[] = {1.0, 1.0}, beta[] = {1.0, 2.0};
  EXPECT_THROW(ProblemSpec::from_upper(5, {-1.0, -1.0}, mu, beta, DomainMode::ball, 1.0), SpecError);
}

TEST(Validate, AdmissibleTwoComponentBall) {
  const auto v = validate_spec(ball2());
  EXPECT_TRUE(v.ok());
  EXPECT_GT(v.lambda1, 1.0);
}

TEST(Validate, ZeroLambdaOnBall) {
  const double mu[] = {1.0};
  const auto s = ProblemSpec::from_upper(5, {0.0}, mu, {}, DomainMode::ball, 1.0);
  const auto v = validate_spec(s);
  EXPECT_FALSE(v.ok());
  EXPECT_TRUE(v.has("lambda must be negative for bounded-domain mode"));
}

TEST(Validate, LambdaBelowFirstEigenvalue) {
  const double mu[] = {1.0};
  const auto s = ProblemSpec::from_upper(5, {-25.0}, mu, {}, DomainMode::ball, 1.0);
  const auto v = validate_spec(s);
  EXPECT_FALSE(v.ok());
  EXPECT_TRUE(v.has("must exceed -lambda_1"));
}

TEST(Validate, AsymmetricCoupling) {
  Eigen::MatrixXd r(2, 2);
  r << 1.0, 1.0, 2.0, 1.0;
  const ProblemSpec s(5, {-1.0, -1.0}, r, DomainMode::ball, 1.0);
  const auto v = validate_spec(s);
  EXPECT_FALSE(v.ok());
  EXPECT_TRUE(v.has("coupling not symmetric"));
}

TEST(Validate, NonCooperativeAndNonPositiveMu) {
  const double mu[] = {0.0, 1.0}, beta[] = {-0.5};
  const auto s = ProblemSpec::from_upper(5, {-1.0, -1.0}, mu, beta, DomainMode::ball, 1.0);
  const auto v = validate_spec(s);
  EXPECT_TRUE(v.has("mu_1 must be positive"));
  EXPECT_TRUE(v.has("cooperative"));
}

TEST(Validate, WholeSpaceNeedsZeroLambda) {
  const auto s = parse_spec(R"({"dimension": 5, "components": 1, "lambda": [-1], "mu": [1],
                               "mode": "whole-space"})");
  const auto v = validate_spec(s);
  EXPECT_FALSE(v.ok());
  EXPECT_TRUE(v.has("whole-space mode requires lambda = 0"));
  EXPECT_TRUE(validate_spec(s.with_lambda({0.0})).ok());
}

TEST(Validate, LowDimensionWarns) {
  const double mu[] = {1.0};
  const auto s = ProblemSpec::from_upper(4, {-1.0}, mu, {}, DomainMode::ball, 1.0);
  const auto v = validate_spec(s);
  EXPECT_TRUE(v.ok());
  ASSERT_EQ(v.warnings.size(), 1u);
}

TEST(Config, MinimalDocument) {
  const auto s = parse_spec(R"({"dimension": 5, "components": 2, "lambda": [-1, -0.5],
                               "mu": [1, 2], "beta": [0.3], "radius": 2})");
  EXPECT_EQ(s.dimension(), 5);
  EXPECT_EQ(s.components(), 2);
  EXPECT_EQ(s.lambda()[1], -0.5);
  EXPECT_EQ(s.mu(1), 2.0);
  EXPECT_EQ(s.beta(0, 1), 0.3);
  EXPECT_EQ(s.beta(1, 0), 0.3);
  EXPECT_EQ(s.radius(), 2.0);
  EXPECT_EQ(s.mode(), DomainMode::ball);
  EXPECT_EQ(s.tolerances(), Tolerances{});
}

TEST(Config, MissingBetaNamesTheField) {
  try {
    parse_spec(R"({"dimension": 5, "components": 2, "lambda": [-1, -1], "mu": [1, 1], "radius": 1})");
    FAIL() << "expected a missing-field error";
  } catch (const SpecError& e) {
    EXPECT_EQ(e.field(), "beta");
    EXPECT_NE(std::string(e.what()).find("missing required field 'beta'"), std::string::npos);
  }
}

TEST(Config, ParseErrorCarriesPosition) {
  try {
    parse_spec("{\"dimension\": 5,\n \"components\": }");
    FAIL() << "expected a parse error";
  } catch (const SpecError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Config, UnknownKeysAndWrongTypes) {
  EXPECT_THROW(parse_spec(R"({"dimension": 5, "components": 1, "lambda": [-1], "mu": [1],
                              "radius": 1, "colour": 3})"),
               SpecError);
  EXPECT_THROW(parse_spec(R"({"dimension": "five", "components": 1, "lambda": [-1], "mu": [1],
                              "radius": 1})"),
               SpecError);
  EXPECT_THROW(parse_spec(R"({"dimension": 5, "components": 1, "lambda": [-1], "mu": [1],
                              "radius": 1, "tolerances": {"bogus": 1}})"),
               SpecError);
  EXPECT_THROW(parse_spec(R"({"dimension": 5, "components": 2, "lambda": [-1], "mu": [1, 1],
                              "beta": [1], "radius": 1})"),
               SpecError);
}

TEST(Config, OverridesReachNestedKeys) {
  auto doc = parse_config_text(R"({"dimension": 5, "components": 1, "lambda": [-1], "mu": [1], "radius": 1})");
  apply_override(doc, "tolerances.grid_nodes=500");
  apply_override(doc, "lambda=[-0.5]");
  apply_override(doc, "mode=whole-space");
  const auto s = spec_from_json(doc);
  EXPECT_EQ(s.tolerances().grid_nodes, 500);
  EXPECT_EQ(s.lambda()[0], -0.5);
  EXPECT_EQ(s.mode(), DomainMode::whole_space);
  EXPECT_THROW(apply_override(doc, "novalue"), SpecError);
}

TEST(Config, RoundTripOfRandomValidSpecs) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(0.1, 3.0), lam(-5.0, -0.01);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 1 + trial % 4;
    std::vector<double> mu(static_cast<std::size_t>(k)), beta, lambda;
    for (double& m : mu) m = pos(rng);
    for (int i = 0; i < k * (k - 1) / 2; ++i) beta.push_back(pos(rng));
    const double l = lam(rng);
    lambda.assign(static_cast<std::size_t>(k), l);
    Tolerances tol;
    tol.grid_nodes = 64;
    tol.seed = rng();
    const auto s = ProblemSpec::from_upper(5 + trial % 2, lambda, mu, beta, DomainMode::ball, 1.0, tol);
    ASSERT_TRUE(validate_spec(s).ok());
    const auto back = parse_spec(write_spec(s));
    EXPECT_EQ(back, s);
    EXPECT_TRUE(validate_spec(back).ok());
    EXPECT_EQ(spec_hash(back), spec_hash(s));
  }
}

TEST(Subcritical, EpsilonRange) {
  const auto s = ball2();
  EXPECT_THROW(SubcriticalSpec(s, 0.0), SpecError);
  EXPECT_THROW(SubcriticalSpec(s, s.p() - 1.0), SpecError);
  const SubcriticalSpec sub(s, 0.1);
  EXPECT_DOUBLE_EQ(sub.exponent(), 10.0 / 3.0 - 0.2);
  EXPECT_DOUBLE_EQ(sub.alpha(), 2.0 / 3.0 - 0.1);
}

TEST(Report, EntriesAreUniqueAndFinite) {
  EnergyReport r("amplitudes", ball2());
  r.add("d_k", 0.5);
  EXPECT_THROW(r.add("d_k", 0.6), DomainError);
  EXPECT_THROW(r.add("bad", std::nan("")), DomainError);
  r.verdict("x", true, 1.0);
  EXPECT_TRUE(r.all_pass());
  r.verdict("y", false, -1.0);
  EXPECT_FALSE(r.all_pass());
  const auto j = nlohmann::json::parse(r.to_json());
  EXPECT_EQ(j["entries"][0]["name"], "d_k");
  EXPECT_EQ(j["verdicts"][1]["result"], "FAIL");
  EXPECT_EQ(j["spec_hash"], spec_hash(ball2()));
}

TEST(Report, SeventeenDigits) {
  EXPECT_EQ(EnergyReport::num(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(EnergyReport::num(M_PI)), M_PI);
}

TEST(Report, HashTracksTolerances) {
  Tolerances t;
  t.seed = 7;
  EXPECT_NE(spec_hash(ball2()), spec_hash(ball2().with_tolerances(t)));
}
