#pragma once

#include <array>
#include <string>
#include <vector>

#include "rnnode/linalg.hpp"

namespace rnnode {

// Ternary-simplex geometry for N = 3: vertex 1 bottom-left, vertex 2
// bottom-right, vertex 3 on top, inside a square canvas of side `size`.
struct TernaryFrame {
  double size = 480.0;
  double margin = 40.0;

  std::array<double, 2> vertex(int index) const;  // index in {0, 1, 2}
  // Barycentric combination of the vertices; y must have length 3.
  std::array<double, 2> project(const Vector& y) const;
};

struct TernaryPath {
  std::vector<Vector> points;
  std::string color = "#1f77b4";
};

// Static SVG: triangle outline, vertex labels 1..3, one polyline per path
// and a filled black dot at each path's first point.
std::string ternary_svg(const std::vector<TernaryPath>& paths, const std::string& title = {},
                        const TernaryFrame& frame = {});
void write_ternary_svg(const std::vector<TernaryPath>& paths, const std::string& path, const std::string& title = {},
                       const TernaryFrame& frame = {});

}  // namespace rnnode
