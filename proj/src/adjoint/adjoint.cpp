#include "vortishape/adjoint/adjoint.hpp"

#include <stdexcept>

#include "vortishape/fem/assembly.hpp"
#include "vortishape/fem/linear_solver.hpp"
#include "vortishape/fem/quadrature.hpp"

namespace vortishape::adjoint {

Vector assemble_adjoint_rhs(const TaylorHoodSpace& space, const Vector& u, double gamma) {
  if (u.size() != space.num_velocity_dofs()) throw std::invalid_argument("velocity vector has wrong length");
  Vector r = Vector::Zero(space.num_dofs());
  if (gamma == 0.0) return r;
  const int n2 = space.num_p2_nodes();
  const auto& rule = fem::triangle_rule_deg5();
  for (int t = 0; t < space.mesh().num_triangles(); ++t) {
    const fem::Element el = fem::element(space, t);
    const double area = std::abs(el.area);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const auto dphi = fem::p2_gradients(rule.points[q], el.grad_lambda);
      double curl = 0.0;
      for (int a = 0; a < 6; ++a) curl += u[n2 + el.nodes[a]] * dphi[a].x() - u[el.nodes[a]] * dphi[a].y();
      const double w = -gamma * rule.weights[q] * area * curl;
      // curl(phi e_x) = -d phi/dy, curl(phi e_y) = d phi/dx
      for (int a = 0; a < 6; ++a) {
        r[el.nodes[a]] -= w * dphi[a].y();
        r[n2 + el.nodes[a]] += w * dphi[a].x();
      }
    }
  }
  return r;
}

SparseMatrix constrained_jacobian(const TaylorHoodSpace& space, const Vector& u, double nu) {
  SparseMatrix j;
  fem::assemble_jacobian(space, nu, u, true, j);
  fem::SparseSystem sys{std::move(j), Vector::Zero(space.num_dofs())};
  fem::apply_dirichlet(sys, fem::homogeneous_velocity_dirichlet(space));
  return std::move(sys.matrix);
}

AdjointState solve_adjoint(const TaylorHoodSpace& space, const flow::FlowState& state, double nu, double gamma) {
  Vector rhs = assemble_adjoint_rhs(space, state.u, gamma);
  if (rhs.lpNorm<Eigen::Infinity>() == 0.0)
    return AdjointState{Vector::Zero(space.num_velocity_dofs()), Vector::Zero(space.num_pressure_dofs())};
  for (int d : fem::homogeneous_velocity_dirichlet(space).dofs) rhs[d] = 0.0;
  fem::DirectSolver solver;
  const auto coords = space.dof_coords();
  solver.factorize(constrained_jacobian(space, state.u, nu), &coords);
  const Vector y = solver.solve_transpose(rhs);
  return AdjointState{y.head(space.num_velocity_dofs()), y.tail(space.num_pressure_dofs())};
}

}  // namespace vortishape::adjoint
