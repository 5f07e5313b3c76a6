#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "cnls/config.hpp"
#include "cnls/error.hpp"
#include "cnls/model.hpp"

namespace cnls {

enum class Provenance { computed, oracle, config };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::computed: return "computed";
    case Provenance::oracle: return "oracle";
    case Provenance::config: return "config";
  }
  return "computed";
}

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Digest of the canonical serialization of a spec.
inline std::string spec_hash(const ProblemSpec& spec) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(write_spec(spec))));
  return buf;
}

/// Named scalar results plus pass/fail verdicts, serialized deterministically.
class EnergyReport {
 public:
  struct Entry {
    std::string name;
    double value;
    Provenance provenance;
    double tolerance;
  };
  struct Verdict {
    std::string name;
    bool pass;
    double margin;
  };

  EnergyReport(std::string command, const ProblemSpec& spec)
      : command_(std::move(command)), hash_(cnls::spec_hash(spec)), tol_(spec.tolerances()) {}

  void add(std::string name, double value, Provenance prov = Provenance::computed,
           double tolerance = 0.0) {
    if (!std::isfinite(value)) throw DomainError("report entry '" + name + "' is not finite");
    if (find(name) != nullptr) throw DomainError("duplicate report entry '" + name + "'");
    entries_.push_back({std::move(name), value, prov, tolerance});
  }

  void verdict(std::string name, bool pass, double margin) {
    verdicts_.push_back({std::move(name), pass, std::isfinite(margin) ? margin : 0.0});
  }

  const Entry* find(std::string_view name) const {
    for (const auto& e : entries_)
      if (e.name == name) return &e;
    return nullptr;
  }
  double value(std::string_view name) const {
    const auto* e = find(name);
    if (e == nullptr) throw DomainError("no report entry '" + std::string(name) + "'");
    return e->value;
  }

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  const std::vector<Verdict>& verdicts() const noexcept { return verdicts_; }
  const std::string& spec_hash() const noexcept { return hash_; }
  bool all_pass() const {
    for (const auto& v : verdicts_)
      if (!v.pass) return false;
    return true;
  }

  std::string to_json() const {
    std::string out = "{\n";
    out += "  \"command\": " + quote(command_) + ",\n";
    out += "  \"spec_hash\": " + quote(hash_) + ",\n";
    out += "  \"tolerances\": {";
    out += "\"constraint\": " + num(tol_.constraint) + ", \"newton\": " + num(tol_.newton) +
           ", \"strict\": " + num(tol_.strict) + ", \"grid_nodes\": " +
           std::to_string(tol_.grid_nodes) + ", \"grid_grading\": " + num(tol_.grid_grading) +
           ", \"starts\": " + std::to_string(tol_.starts) +
           ", \"seed\": " + std::to_string(tol_.seed) + ", \"pde_residual\": " +
           num(tol_.pde_residual) + ", \"quadrature\": " + num(tol_.quadrature) + "},\n";
    out += "  \"entries\": [";
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      out += i == 0 ? "\n" : ",\n";
      out += "    {\"name\": " + quote(e.name) + ", \"value\": " + num(e.value) +
             ", \"provenance\": " + quote(to_string(e.provenance)) +
             ", \"tolerance\": " + num(e.tolerance) + "}";
    }
    out += entries_.empty() ? "],\n" : "\n  ],\n";
    out += "  \"verdicts\": [";
    for (std::size_t i = 0; i < verdicts_.size(); ++i) {
      const auto& v = verdicts_[i];
      out += i == 0 ? "\n" : ",\n";
      out += "    {\"name\": " + quote(v.name) + ", \"result\": " +
             quote(v.pass ? "PASS" : "FAIL") + ", \"margin\": " + num(v.margin) + "}";
    }
    out += verdicts_.empty() ? "]\n" : "\n  ]\n";
    out += "}\n";
    return out;
  }

  static std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }

 private:
  static std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    out += '"';
    return out;
  }

  std::string command_;
  std::string hash_;
  Tolerances tol_;
  std::vector<Entry> entries_;
  std::vector<Verdict> verdicts_;
};

}  // namespace cnls
