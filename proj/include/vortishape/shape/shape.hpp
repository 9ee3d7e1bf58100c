#pragma once

#include <string>
#include <vector>

#include "vortishape/adjoint/adjoint.hpp"
#include "vortishape/fem/space.hpp"
#include "vortishape/flow/flow.hpp"

namespace vortishape::shape {

using fem::SparseMatrix;
using fem::TaylorHoodSpace;
using fem::Vector;
using mesh::BoundaryTag;
using mesh::Vec2;

/// Values attached to the vertices of the obstacle loop. Entry i belongs to
/// vertices[i]; loop edge edges[i] runs from vertices[i] to vertices[i+1].
/// Normals point out of the fluid and tangents are their counter-clockwise
/// rotation.
struct BoundaryData {
  std::vector<int> vertices;
  std::vector<int> edges;
  std::vector<Vec2> points;
  std::vector<Vec2> normals;
  std::vector<Vec2> tangents;
};
BoundaryData free_boundary(const mesh::Mesh& mesh);

struct NormalExtension {
  Vector field;                // N in velocity layout
  std::vector<double> kappa;   // per obstacle vertex
};

/// Robin extension of the unit normal and the curvature recovered from it.
/// kappa is the tangential divergence of N on each obstacle edge, divided by
/// N.n, averaged from edges to vertices. With normals pointing out of the
/// fluid a circular obstacle has kappa = -1/r.
NormalExtension extend_normal(const TaylorHoodSpace& space, double eps3);

struct ShapeGradient {
  BoundaryData boundary;
  std::vector<double> kappa;
  std::vector<double> grad_g;
  std::vector<double> grad_l;  // equals grad_g until a multiplier is applied
};

/// alpha kappa - gamma/2 |curl u|^2 + du/dn . (nu dv/dn + gamma curl(u) tau)
/// on every obstacle vertex, from edge means averaged to vertices.
ShapeGradient shape_gradient(const TaylorHoodSpace& space, const Vector& u, const Vector& v,
                             const std::vector<double>& kappa, double alpha, double gamma, double nu);

/// grad L = grad G + ell + b (vol - m), the gradient of
/// G + ell (vol - m) + b/2 (vol - m)^2.
std::vector<double> lagrangian_gradient(const std::vector<double>& grad_g, double ell, double b, double vol,
                                        double m);

enum class Method { AugLag, DivFree };
std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct DeformationField {
  Vector theta;     // velocity layout
  Vector pressure;  // multiplier of the divergence constraint (DivFree only)
  Method method = Method::AugLag;
};

/// eps (grad theta, grad phi) + (theta, phi)_free = -(g n, phi)_free with
/// theta = 0 on the outer boundary. g holds obstacle vertex values.
DeformationField deformation_robin(const TaylorHoodSpace& space, const std::vector<double>& g, double eps);

/// Same operator with eps1, plus the constraint (psi, div theta) = 0 and the
/// multiplier term -eps2 (q, div phi).
DeformationField deformation_divfree(const TaylorHoodSpace& space, const std::vector<double>& g, double eps1,
                                     double eps2);

/// Vertex values of a velocity-layout field.
std::vector<Vec2> vertex_values(const TaylorHoodSpace& space, const Vector& theta);

/// Integral over the obstacle of g (theta.n), with g and the vertex
/// displacement interpolated linearly along each edge.
double directional_derivative(const mesh::Mesh& mesh, const std::vector<double>& g,
                              const std::vector<Vec2>& displacement);

/// ||theta||^2 over the obstacle boundary (P2 trace).
double boundary_norm_squared(const TaylorHoodSpace& space, const Vector& theta);

/// Residual max |(psi, div theta)| over P1 test functions.
double divergence_residual(const TaylorHoodSpace& space, const Vector& theta);

/// `x,y,kappa,gradG,gradL` rows.
void write_shape_gradient_csv(const std::string& path, const ShapeGradient& g);

}  // namespace vortishape::shape
