#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vortishape/fem/assembly.hpp"
#include "vortishape/fem/linear_solver.hpp"
#include "vortishape/fem/space.hpp"
#include "vortishape/mesh/mesh.hpp"

namespace vortishape::flow {

using fem::SparseMatrix;
using fem::TaylorHoodSpace;
using fem::Vector;
using mesh::BoundaryTag;
using mesh::Vec2;

/// Data of the stationary problem. Null functions mean zero.
struct FlowProblem {
  double nu = 0.01;
  fem::VectorFunction forcing;
  /// Velocity on Inflow, Wall and Free edges.
  fem::BoundaryFunction dirichlet;
  /// Extra traction h on the outflow: the condition becomes
  /// -p n + nu du/dn - 1/2 (u.n) u = h.
  fem::VectorFunction outflow_traction;
};

/// Poiseuille profile a (y - lo)(hi - y) on the inflow side, no slip on
/// walls and the obstacle.
fem::BoundaryFunction poiseuille_inflow(const mesh::Rect& rect, double amplitude);
FlowProblem channel_problem(const mesh::Rect& rect, double nu, double amplitude);

struct FlowState {
  Vector u;  // [u_x, u_y] over P2 nodes
  Vector p;  // P1

  Vector packed() const;
  static FlowState unpack(const TaylorHoodSpace& space, const Vector& x);
};

struct NewtonOptions {
  double tol = 1e-8;
  int max_iter = 25;
  bool allow_damping = true;
};

struct NewtonReport {
  int iterations = 0;
  std::vector<double> increments;  // H1 norm of u^{k+1} - u^k
  std::vector<double> residuals;   // max-norm nonlinear residual after each step
  std::vector<double> damping;     // step length used (1 = plain Newton)
  double final_residual = 0.0;
  bool converged = false;
};

/// Owns the matrix, factorization and boundary data for one space. The
/// sparsity pattern and the symbolic factorization are reused across
/// Newton steps and across meshes with the same connectivity.
class FlowSolver {
 public:
  FlowSolver(const TaylorHoodSpace& space, FlowProblem problem);

  const TaylorHoodSpace& space() const { return space_; }
  const FlowProblem& problem() const { return problem_; }
  const fem::DirichletData& dirichlet() const { return dirichlet_; }

  FlowState stokes();
  FlowState newton_step(const FlowState& current);
  /// Max-norm residual of the discrete nonlinear equations at x, with
  /// Dirichlet rows measured as u - g.
  double residual(const FlowState& state) const;
  std::pair<FlowState, NewtonReport> solve(const NewtonOptions& opts, const FlowState* initial = nullptr);

 private:
  FlowState solve_linear(const Vector& w, bool newton, const Vector& rhs);

  const TaylorHoodSpace& space_;
  FlowProblem problem_;
  fem::DirichletData dirichlet_;
  Vector load_;
  SparseMatrix matrix_;
  fem::DirectSolver solver_;
  std::vector<Vec2> coords_;
};

FlowState solve_stokes(const TaylorHoodSpace& space, const FlowProblem& problem);
FlowState newton_step(const TaylorHoodSpace& space, const FlowState& current, const FlowProblem& problem);
std::pair<FlowState, NewtonReport> solve_navier_stokes(const TaylorHoodSpace& space, const FlowProblem& problem,
                                                       const NewtonOptions& opts = {},
                                                       const FlowState* initial = nullptr);

/// `iter,increment,residual` rows.
void write_newton_csv(const std::string& path, const NewtonReport& report);

}  // namespace vortishape::flow
