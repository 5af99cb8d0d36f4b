#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "nodal_lab/errors.hpp"
#include "nodal_lab/point.hpp"

namespace nodal_lab {

struct Ball {
  Point center{};
  double radius = 1.0;

  Ball() = default;
  Ball(Point c, double r) : center(c), radius(r) {
    if (!(r > 0.0)) throw InvalidInput("ball radius must be positive");
  }

  bool contains(const Point& x) const { return distance(x, center) <= radius; }
  bool operator==(const Ball&) const = default;
};

/// Axis-aligned cube. `lineage` lists the flat subcube index chosen at each
/// partition level, so a cube can be re-derived from its root.
struct Cube {
  int dim = 2;
  Point center{};
  double half_width = 1.0;
  std::vector<int> lineage;

  Cube() = default;
  Cube(int n, Point c, double h, std::vector<int> path = {})
      : dim(n), center(c), half_width(h), lineage(std::move(path)) {
    if (n != 2 && n != 3) throw InvalidInput("cube dimension must be 2 or 3");
    if (!(h > 0.0)) throw InvalidInput("cube half width must be positive");
  }

  double edge() const { return 2.0 * half_width; }
  double diameter() const { return edge() * std::sqrt(static_cast<double>(dim)); }
  double volume() const { return std::pow(edge(), dim); }

  bool contains(const Point& x) const {
    for (int a = 0; a < dim; ++a)
      if (std::abs(x[a] - center[a]) > half_width) return false;
    return true;
  }

  bool operator==(const Cube&) const = default;
};

}  // namespace nodal_lab
