#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vortishape/fem/assembly.hpp"
#include "vortishape/fem/space.hpp"

namespace vortishape::fem {

using ScalarFunction = std::function<double(const Vec2&)>;
using GradientFunction = std::function<Eigen::Matrix2d(const Vec2&)>;

/// Nodal interpolation onto P2 (vector, length num_velocity_dofs) and P1.
Vector interpolate_velocity(const TaylorHoodSpace& space, const VectorFunction& f);
Vector interpolate_p1(const TaylorHoodSpace& space, const ScalarFunction& f);

/// Velocity value and gradient (g(c,d) = du_c/dx_d) at barycentric l of triangle t.
struct VelocitySample {
  Vec2 value;
  Eigen::Matrix2d grad;
};
VelocitySample sample_velocity(const TaylorHoodSpace& space, const Vector& u, int tri, const std::array<double, 3>& l);
double sample_p1(const TaylorHoodSpace& space, const Vector& p, int tri, const std::array<double, 3>& l);

/// curl u = du_y/dx - du_x/dy per triangle, as its values at the three
/// vertices (curl of P2 is linear on each triangle).
std::vector<std::array<double, 3>> curl_per_triangle(const TaylorHoodSpace& space, const Vector& u);
/// L2 projection of curl u onto continuous P1.
Vector curl_p1(const TaylorHoodSpace& space, const Vector& u);
/// Integral of |curl u|^2 over the domain (exact).
double vorticity_squared(const TaylorHoodSpace& space, const Vector& u);

/// (grad u) n at Gauss points of every edge carrying `tag`.
struct EdgeSamples {
  int edge = -1;
  std::vector<Vec2> points;
  std::vector<double> weights;  // include the edge length
  std::vector<Vec2> values;
};
std::vector<EdgeSamples> normal_derivative(const TaylorHoodSpace& space, const Vector& u, BoundaryTag tag,
                                           int points_per_edge = 4);

struct Norms {
  double l2 = 0.0;
  double h1_semi = 0.0;
  double h1 = 0.0;
};

/// Norms of a P2 vector field (length num_velocity_dofs).
Norms velocity_norms(const TaylorHoodSpace& space, const Vector& u);
/// Norms of a P1 scalar field (length num_vertices).
Norms p1_norms(const TaylorHoodSpace& space, const Vector& p);
/// Norms of a P2 scalar field (length num_p2_nodes).
Norms p2_scalar_norms(const TaylorHoodSpace& space, const Vector& s);

/// ||u_h - u|| for exact u and its gradient, with a degree-8 rule.
Norms velocity_error(const TaylorHoodSpace& space, const Vector& u, const VectorFunction& exact,
                     const GradientFunction& exact_grad);
/// ||p_h - p||_{L2} (h1 fields left zero).
Norms pressure_error(const TaylorHoodSpace& space, const Vector& p, const ScalarFunction& exact);

/// Locates points in a mesh with a uniform bucket grid. Points outside the
/// mesh fall back to the nearest triangle (barycentric coordinates then
/// extrapolate).
class PointLocator {
 public:
  explicit PointLocator(const mesh::Mesh& mesh);
  struct Hit {
    int tri = -1;
    std::array<double, 3> bary{};
    bool inside = false;
  };
  Hit locate(const Vec2& p) const;

 private:
  const mesh::Mesh& mesh_;
  Vec2 lo_, hi_;
  int nx_ = 1, ny_ = 1;
  double cell_ = 1.0;
  std::vector<std::vector<int>> buckets_;
};

/// Legacy VTK unstructured grid with vertex data. Vector fields are P2
/// velocity-layout vectors and are sampled at the vertices.
struct VtkField {
  std::string name;
  Vector values;
  bool vector = false;
};
void write_vtk(const std::string& path, const TaylorHoodSpace& space, const std::vector<VtkField>& fields);

}  // namespace vortishape::fem
