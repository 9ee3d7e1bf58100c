#pragma once

#include <array>
#include <vector>

namespace vortishape::fem {

/// Triangle rule in barycentric coordinates; weights sum to 1 (multiply by
/// the triangle area).
struct TriangleRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int degree = 0;
};

/// Rule on [0,1]; weights sum to 1 (multiply by the edge length).
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
  int degree = 0;
};

/// 7-point rule, exact for degree 5.
const TriangleRule& triangle_rule_deg5();
/// 16-point rule, exact for degree 8.
const TriangleRule& triangle_rule_deg8();
const TriangleRule& triangle_rule(int degree);

/// Gauss-Legendre with n points, exact for degree 2n-1 (n = 1..5).
const LineRule& gauss_line_rule(int n);

}  // namespace vortishape::fem
