#pragma once

#include "vortishape/fem/space.hpp"
#include "vortishape/flow/flow.hpp"

namespace vortishape::adjoint {

using fem::SparseMatrix;
using fem::TaylorHoodSpace;
using fem::Vector;

struct AdjointState {
  Vector v;   // velocity layout
  Vector pi;  // P1
};

/// -gamma (curl u, curl phi) for every velocity test function, as a vector
/// over the full unknown layout (pressure rows zero).
Vector assemble_adjoint_rhs(const TaylorHoodSpace& space, const Vector& u, double gamma);

/// Newton Jacobian at u with homogeneous velocity constraints eliminated
/// symmetrically. The adjoint matrix is its transpose.
SparseMatrix constrained_jacobian(const TaylorHoodSpace& space, const Vector& u, double nu);

/// Solves J(u)^T (v, pi) = G'(u) with v = 0 on Inflow, Wall and Free.
AdjointState solve_adjoint(const TaylorHoodSpace& space, const flow::FlowState& state, double nu, double gamma);

}  // namespace vortishape::adjoint
