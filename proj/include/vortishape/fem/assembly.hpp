#pragma once

#include <functional>
#include <vector>

#include "vortishape/fem/quadrature.hpp"
#include "vortishape/fem/space.hpp"

namespace vortishape::fem {

using VectorFunction = std::function<Vec2(const Vec2&)>;
using BoundaryFunction = std::function<Vec2(const Vec2&, BoundaryTag)>;

// All matrices below are num_dofs x num_dofs over the full [u_x, u_y, p]
// layout. Row index = test function, column index = trial function.
// Velocity arguments `w` have length num_velocity_dofs().

/// nu * (grad u, grad v), both components.
SparseMatrix assemble_a(const TaylorHoodSpace& space, double nu, const TriangleRule& rule = triangle_rule_deg5());
/// (B u).v = b(w; u, v) = ((w.grad) u, v).
SparseMatrix assemble_b(const TaylorHoodSpace& space, const Vector& w, const TriangleRule& rule = triangle_rule_deg5());
/// (N u).v = b(u; w, v).
SparseMatrix assemble_b_transport(const TaylorHoodSpace& space, const Vector& w,
                                  const TriangleRule& rule = triangle_rule_deg5());
/// (C u).v = (w.n, u.v) on the outflow boundary.
SparseMatrix assemble_outflow_c(const TaylorHoodSpace& space, const Vector& w);
/// (C' u).v = (u.n, w.v) on the outflow boundary.
SparseMatrix assemble_outflow_c_transport(const TaylorHoodSpace& space, const Vector& w);
/// d(v, p) + d(u, q) with d(u, q) = -(q, div u).
SparseMatrix assemble_d(const TaylorHoodSpace& space, const TriangleRule& rule = triangle_rule_deg5());

/// Jacobian of the stationary Navier-Stokes operator with the convective
/// outflow condition, linearized at w:
///   nu a + b(w;.,.) + b(.;w,.) - 1/2 [(. n, w.v) + (w.n, . v)]_out + d + d^T.
/// With newton = false only the Picard part nu a + b(w;.,.) - 1/2 (w.n,..)_out + d + d^T.
void assemble_jacobian(const TaylorHoodSpace& space, double nu, const Vector& w, bool newton, SparseMatrix& out,
                       const TriangleRule& rule = triangle_rule_deg5());

/// Volume load (f, v) over velocity rows (pressure rows zero).
Vector assemble_load(const TaylorHoodSpace& space, const VectorFunction& f,
                     const TriangleRule& rule = triangle_rule_deg8());
/// Boundary load (h, v) on the outflow boundary.
Vector assemble_outflow_load(const TaylorHoodSpace& space, const VectorFunction& h);

/// Newton right-hand side b(w;w,v) - 1/2 (w.n, w.v)_out, velocity rows.
Vector assemble_newton_rhs(const TaylorHoodSpace& space, const Vector& w,
                           const TriangleRule& rule = triangle_rule_deg5());

/// Nonlinear residual nu a(u,v) + b(u;u,v) - 1/2(u.n,u.v)_out + d(v,p) + d(u,q)
/// for the full unknown vector x (forcing not included).
Vector assemble_operator(const TaylorHoodSpace& space, double nu, const Vector& x,
                         const TriangleRule& rule = triangle_rule_deg5());

/// Constrained unknowns and their values.
struct DirichletData {
  std::vector<int> dofs;
  std::vector<double> values;
};

/// Velocity values on every P2 node of edges tagged Inflow, Wall or Free.
/// A node shared by several tags uses Wall/Free before Inflow.
DirichletData velocity_dirichlet(const TaylorHoodSpace& space, const BoundaryFunction& g);
/// Same nodes, zero values.
DirichletData homogeneous_velocity_dirichlet(const TaylorHoodSpace& space);

/// Symmetric elimination: constrained columns are folded into the
/// right-hand side, constrained rows become identity rows with the value.
void apply_dirichlet(SparseSystem& system, const DirichletData& data);

}  // namespace vortishape::fem
