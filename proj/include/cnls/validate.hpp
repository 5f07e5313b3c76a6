#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "cnls/model.hpp"
#include "cnls/radial/eigen.hpp"

namespace cnls {

struct Violation {
  std::string field;
  std::string message;
};

struct ValidationResult {
  std::vector<Violation> violations;
  std::vector<std::string> warnings;
  double lambda1 = 0.0;  // first Dirichlet eigenvalue of the ball (ball mode)

  bool ok() const noexcept { return violations.empty(); }
  bool has(std::string_view needle) const {
    for (const auto& v : violations)
      if (v.message.find(needle) != std::string::npos) return true;
    return false;
  }
};

/// Checks the structural invariants of a spec and the admissibility of lambda.
/// Violations are returned as data; nothing here throws.
inline ValidationResult validate_spec(const ProblemSpec& spec) {
  ValidationResult out;
  auto fail = [&](std::string field, std::string msg) {
    out.violations.push_back({std::move(field), std::move(msg)});
  };
  const int k = spec.components();
  const int n = spec.dimension();
  const auto& r = spec.coupling();

  if (n < 3) fail("dimension", "dimension must be at least 3");
  if (n == 3 || n == 4)
    out.warnings.push_back("dimension " + std::to_string(n) +
                           " is below 5: existence and classification results do not apply");

  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (!std::isfinite(r(i, j))) fail("coupling", "coupling entries must be finite");
    }
  }
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      if (r(i, j) != r(j, i)) {
        fail("beta", "coupling not symmetric: beta_" + std::to_string(i + 1) +
                         std::to_string(j + 1) + " != beta_" + std::to_string(j + 1) +
                         std::to_string(i + 1));
      }
  for (int i = 0; i < k; ++i)
    if (!(r(i, i) > 0.0)) fail("mu", "mu_" + std::to_string(i + 1) + " must be positive");
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      if (!(r(i, j) > 0.0) || !(r(j, i) > 0.0))
        fail("beta", "coupling must be cooperative: beta_" + std::to_string(i + 1) +
                         std::to_string(j + 1) + " must be positive");

  for (double l : spec.lambda())
    if (!std::isfinite(l)) fail("lambda", "lambda entries must be finite");

  if (spec.mode() == DomainMode::whole_space) {
    for (int i = 0; i < k; ++i)
      if (spec.lambda()[static_cast<std::size_t>(i)] != 0.0)
        fail("lambda", "whole-space mode requires lambda = 0 (Pohozaev forces trivial solutions otherwise)");
    return out;
  }

  if (!(spec.radius() > 0.0) || !std::isfinite(spec.radius())) {
    fail("radius", "radius must be positive");
    return out;
  }
  const int m = spec.tolerances().grid_nodes;
  if (m < 16) {
    fail("tolerances.grid_nodes", "grid needs at least 16 interior nodes");
    return out;
  }
  const double kappa = spec.tolerances().grid_grading;
  if (!(kappa >= 0.0) || kappa > 40.0) {
    fail("tolerances.grid_grading", "grid grading must lie in [0, 40]");
    return out;
  }
  out.lambda1 = eigen_lambda1(RadialGrid(spec.radius(), m, n, kappa), spec.tolerances().eigen);
  for (int i = 0; i < k; ++i) {
    const double l = spec.lambda()[static_cast<std::size_t>(i)];
    if (!(l < 0.0))
      fail("lambda", "lambda must be negative for bounded-domain mode (lambda_" +
                         std::to_string(i + 1) + " = " + std::to_string(l) + ")");
    else if (!(l > -out.lambda1))
      fail("lambda", "lambda_" + std::to_string(i + 1) + " must exceed -lambda_1(ball) = " +
                         std::to_string(-out.lambda1));
  }
  return out;
}

}  // namespace cnls
