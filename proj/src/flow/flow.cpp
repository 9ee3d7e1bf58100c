#include "vortishape/flow/flow.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "vortishape/fem/fields.hpp"

namespace vortishape::flow {

fem::BoundaryFunction poiseuille_inflow(const mesh::Rect& rect, double amplitude) {
  const double lo = rect.lo.y(), hi = rect.hi.y();
  return [=](const Vec2& x, BoundaryTag tag) {
    if (tag != BoundaryTag::Inflow) return Vec2(0.0, 0.0);
    return Vec2(amplitude * (x.y() - lo) * (hi - x.y()), 0.0);
  };
}

FlowProblem channel_problem(const mesh::Rect& rect, double nu, double amplitude) {
  FlowProblem p;
  p.nu = nu;
  p.dirichlet = poiseuille_inflow(rect, amplitude);
  return p;
}

Vector FlowState::packed() const {
  Vector x(u.size() + p.size());
  x << u, p;
  return x;
}

FlowState FlowState::unpack(const TaylorHoodSpace& space, const Vector& x) {
  if (x.size() != space.num_dofs()) throw std::invalid_argument("state vector has wrong length");
  return FlowState{x.head(space.num_velocity_dofs()), x.tail(space.num_pressure_dofs())};
}

FlowSolver::FlowSolver(const TaylorHoodSpace& space, FlowProblem problem)
    : space_(space), problem_(std::move(problem)) {
  if (!(problem_.nu > 0.0)) throw std::invalid_argument("viscosity must be positive");
  dirichlet_ = fem::velocity_dirichlet(space_, problem_.dirichlet);
  load_ = fem::assemble_load(space_, problem_.forcing) + fem::assemble_outflow_load(space_, problem_.outflow_traction);
}

FlowState FlowSolver::solve_linear(const Vector& w, bool newton, const Vector& rhs) {
  fem::assemble_jacobian(space_, problem_.nu, w, newton, matrix_);
  fem::SparseSystem sys{std::move(matrix_), rhs};
  fem::apply_dirichlet(sys, dirichlet_);
  matrix_ = std::move(sys.matrix);
  if (coords_.empty()) coords_ = space_.dof_coords();
  solver_.factorize(matrix_, &coords_);
  return FlowState::unpack(space_, solver_.solve(sys.rhs));
}

FlowState FlowSolver::stokes() {
  return solve_linear(Vector::Zero(space_.num_velocity_dofs()), false, load_);
}

FlowState FlowSolver::newton_step(const FlowState& current) {
  if (current.u.size() != space_.num_velocity_dofs()) throw std::invalid_argument("state does not match the space");
  return solve_linear(current.u, true, load_ + fem::assemble_newton_rhs(space_, current.u));
}

double FlowSolver::residual(const FlowState& state) const {
  const Vector x = state.packed();
  Vector r = fem::assemble_operator(space_, problem_.nu, x) - load_;
  for (size_t i = 0; i < dirichlet_.dofs.size(); ++i) r[dirichlet_.dofs[i]] = x[dirichlet_.dofs[i]] - dirichlet_.values[i];
  return r.lpNorm<Eigen::Infinity>();
}

std::pair<FlowState, NewtonReport> FlowSolver::solve(const NewtonOptions& opts, const FlowState* initial) {
  if (!(opts.tol > 0.0)) throw std::invalid_argument("Newton tolerance must be positive");
  NewtonReport rep;
  FlowState x = (initial && initial->u.size() == space_.num_velocity_dofs() &&
                 initial->p.size() == space_.num_pressure_dofs())
                    ? *initial
                    : stokes();
  double res = residual(x);
  for (int k = 0; k < opts.max_iter; ++k) {
    FlowState next = newton_step(x);
    double lambda = 1.0;
    double next_res = residual(next);
    const auto& inc = rep.increments;
    const bool growing = inc.size() >= 3 && inc[inc.size() - 1] > inc[inc.size() - 2] &&
                         inc[inc.size() - 2] > inc[inc.size() - 3];
    if (opts.allow_damping && growing) {
      while (next_res >= res && lambda > 1.0 / 64) {
        lambda *= 0.5;
        next.u = x.u + lambda * (next.u - x.u);
        next.p = x.p + lambda * (next.p - x.p);
        next_res = residual(next);
      }
    }
    const double increment = fem::velocity_norms(space_, next.u - x.u).h1;
    x = std::move(next);
    res = next_res;
    rep.increments.push_back(increment);
    rep.residuals.push_back(res);
    rep.damping.push_back(lambda);
    rep.iterations = k + 1;
    if (!std::isfinite(increment)) break;
    if (increment < opts.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.final_residual = res;
  return {std::move(x), std::move(rep)};
}

FlowState solve_stokes(const TaylorHoodSpace& space, const FlowProblem& problem) {
  return FlowSolver(space, problem).stokes();
}

FlowState newton_step(const TaylorHoodSpace& space, const FlowState& current, const FlowProblem& problem) {
  return FlowSolver(space, problem).newton_step(current);
}

std::pair<FlowState, NewtonReport> solve_navier_stokes(const TaylorHoodSpace& space, const FlowProblem& problem,
                                                       const NewtonOptions& opts, const FlowState* initial) {
  return FlowSolver(space, problem).solve(opts, initial);
}

void write_newton_csv(const std::string& path, const NewtonReport& report) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "iter,increment,residual\n" << std::setprecision(10);
  for (size_t i = 0; i < report.increments.size(); ++i)
    f << i + 1 << ',' << report.increments[i] << ',' << report.residuals[i] << '\n';
}

}  // namespace vortishape::flow
