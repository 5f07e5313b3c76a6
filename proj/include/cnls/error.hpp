#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace cnls {

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

/// Malformed or incomplete configuration.
class SpecError : public Error {
 public:
  SpecError(std::string field, const std::string& what)
      : Error(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }
  const char* kind() const noexcept override { return "spec"; }

 private:
  std::string field_;
};

/// A numerical procedure did not reach its tolerance.
class SolverError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "nonconvergence"; }
};

/// Input outside the domain an operation accepts (degenerate direction,
/// dimension too large, non-positive field, ...).
class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

/// A strict inequality that must hold for cooperative coupling was not
/// resolved with the required margin.
class StrictnessViolation : public Error {
 public:
  StrictnessViolation(std::string lower, std::string upper, double margin,
                      const std::string& what)
      : Error(what),
        lower_(std::move(lower)),
        upper_(std::move(upper)),
        margin_(margin) {}
  const std::string& lower() const noexcept { return lower_; }
  const std::string& upper() const noexcept { return upper_; }
  double margin() const noexcept { return margin_; }
  const char* kind() const noexcept override { return "strictness"; }

 private:
  std::string lower_;
  std::string upper_;
  double margin_;
};

}  // namespace cnls
