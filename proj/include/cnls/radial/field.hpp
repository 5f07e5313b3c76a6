#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cnls/error.hpp"
#include "cnls/radial/grid.hpp"

namespace cnls {

using GridPtr = std::shared_ptr<const RadialGrid>;

inline GridPtr make_grid(double radius, int interior_nodes, int dimension, double grading = 0.0) {
  return std::make_shared<const RadialGrid>(radius, interior_nodes, dimension, grading);
}

inline GridPtr share(RadialGrid g) { return std::make_shared<const RadialGrid>(std::move(g)); }

/// One radial component sampled at the grid unknowns.
struct RadialField {
  GridPtr grid;
  std::vector<double> values;
  bool nonnegative = false;  // set by the positive solvers

  /// Linear interpolation; zero outside [0, R] per the Dirichlet condition.
  double at(double r) const {
    if (r < 0.0) r = -r;
    if (r >= grid->radius()) return 0.0;
    const int j = grid->cell(r);
    const double w = (r - grid->node(j)) / grid->spacing(j);
    const auto js = static_cast<std::size_t>(j);
    const double lo = values[js];
    const double hi = js + 1 < values.size() ? values[js + 1] : 0.0;
    return (1.0 - w) * lo + w * hi;
  }
};

/// k components on one shared grid, with the Dirichlet and L^2 integrals of
/// every component kept current.
class VectorField {
 public:
  VectorField(GridPtr grid, std::vector<std::vector<double>> components)
      : grid_(std::move(grid)), comps_(std::move(components)) {
    if (!grid_) throw DomainError("vector field needs a grid");
    for (const auto& c : comps_) {
      if (c.size() != static_cast<std::size_t>(grid_->size()))
        throw DomainError("component length does not match the grid");
      for (double v : c)
        if (!std::isfinite(v)) throw DomainError("field values must be finite");
    }
    refresh();
  }

  const GridPtr& grid() const noexcept { return grid_; }
  int components() const noexcept { return static_cast<int>(comps_.size()); }
  const std::vector<double>& component(int i) const {
    return comps_[static_cast<std::size_t>(i)];
  }
  const std::vector<std::vector<double>>& data() const noexcept { return comps_; }
  RadialField field(int i) const { return {grid_, component(i), is_nonnegative()}; }

  void set_component(int i, std::vector<double> values) {
    if (values.size() != static_cast<std::size_t>(grid_->size()))
      throw DomainError("component length does not match the grid");
    comps_[static_cast<std::size_t>(i)] = std::move(values);
    refresh();
  }

  /// int |grad u_i|^2
  double dirichlet(int i) const { return dirichlet_[static_cast<std::size_t>(i)]; }
  /// int u_i^2
  double mass(int i) const { return mass_[static_cast<std::size_t>(i)]; }
  /// int (|grad u_i|^2 + lambda u_i^2)
  double quadratic_form(int i, double lambda) const { return dirichlet(i) + lambda * mass(i); }

  bool is_nonnegative() const {
    for (const auto& c : comps_)
      for (double v : c)
        if (v < 0.0) return false;
    return true;
  }

  VectorField scaled(double s) const {
    auto copy = comps_;
    for (auto& c : copy)
      for (double& v : c) v *= s;
    return VectorField(grid_, std::move(copy));
  }

  /// Same values reordered by component permutation perm (new i = old perm[i]).
  VectorField permuted(const std::vector<int>& perm) const {
    std::vector<std::vector<double>> copy;
    copy.reserve(perm.size());
    for (int p : perm) copy.push_back(comps_[static_cast<std::size_t>(p)]);
    return VectorField(grid_, std::move(copy));
  }

 private:
  void refresh() {
    dirichlet_.resize(comps_.size());
    mass_.resize(comps_.size());
    for (std::size_t i = 0; i < comps_.size(); ++i) {
      dirichlet_[i] = grid_->dirichlet(comps_[i]);
      mass_[i] = grid_->mass(comps_[i]);
    }
  }

  GridPtr grid_;
  std::vector<std::vector<double>> comps_;
  std::vector<double> dirichlet_;
  std::vector<double> mass_;
};

/// CSV snapshot: header "r,u_1,...,u_k", one row per unknown plus a final
/// row at r = R holding the Dirichlet zeros, LF endings.
inline void write_csv(std::ostream& os, const VectorField& f) {
  os << "r";
  for (int i = 0; i < f.components(); ++i) os << ",u_" << (i + 1);
  os << '\n';
  os << std::setprecision(17);
  const auto& g = *f.grid();
  for (int j = 0; j < g.size(); ++j) {
    os << g.node(j);
    for (int i = 0; i < f.components(); ++i) os << ',' << f.component(i)[static_cast<std::size_t>(j)];
    os << '\n';
  }
  os << g.radius();
  for (int i = 0; i < f.components(); ++i) os << ",0";
  os << '\n';
}

/// Reads a snapshot written by write_csv. The grid is rebuilt from the r
/// column; the last row is the boundary and must hold zeros.
inline VectorField read_csv(std::istream& is, int dimension) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("r,", 0) != 0)
    throw DomainError("profile CSV must start with an 'r,u_1,...' header");
  const auto k = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  std::vector<double> r;
  std::vector<std::vector<double>> comps(k);
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw DomainError("profile CSV row " + std::to_string(row) + ": bad number '" + cell + "'");
      }
    }
    if (vals.size() != k + 1)
      throw DomainError("profile CSV row " + std::to_string(row) + ": wrong column count");
    r.push_back(vals[0]);
    for (std::size_t i = 0; i < k; ++i) comps[i].push_back(vals[i + 1]);
  }
  if (r.size() < 18) throw DomainError("profile CSV has too few rows");
  for (auto& c : comps) {
    if (c.back() != 0.0) throw DomainError("profile CSV: last row must be the boundary r = R with zeros");
    c.pop_back();
  }
  return VectorField(share(RadialGrid::from_nodes(std::move(r), dimension)), std::move(comps));
}

}  // namespace cnls
