#include "vortishape/shape/shape.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "vortishape/fem/assembly.hpp"
#include "vortishape/fem/fields.hpp"
#include "vortishape/fem/linear_solver.hpp"
#include "vortishape/fem/quadrature.hpp"

namespace vortishape::shape {

namespace {

Vec2 rot90(const Vec2& n) { return Vec2(-n.y(), n.x()); }

// P2 trace basis along an edge, ordered like boundary_edge_nodes.
std::array<double, 3> edge_basis(double s) { return {(1 - s) * (1 - 2 * s), s * (2 * s - 1), 4 * s * (1 - s)}; }

std::vector<int> outer_nodes(const TaylorHoodSpace& space) {
  return space.boundary_nodes({BoundaryTag::Inflow, BoundaryTag::Wall, BoundaryTag::Outflow});
}

// eps * stiffness + mass on the obstacle, scalar P2.
SparseMatrix scalar_robin_matrix(const TaylorHoodSpace& space, double eps) {
  SparseMatrix m = fem::SystemPattern(space, 1, false).zero_matrix();
  fem::MatrixAssembler asmb(m);
  const auto& rule = fem::triangle_rule_deg5();
  for (int t = 0; t < space.mesh().num_triangles(); ++t) {
    const fem::Element el = fem::element(space, t);
    const double area = std::abs(el.area);
    double k[6][6] = {};
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const auto g = fem::p2_gradients(rule.points[q], el.grad_lambda);
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) k[a][b] += eps * rule.weights[q] * area * g[a].dot(g[b]);
    }
    asmb.add_block<6, 6>(el.nodes, el.nodes, k);
  }
  const auto& line = fem::gauss_line_rule(4);
  const auto& mesh = space.mesh();
  for (int b = 0; b < static_cast<int>(mesh.boundary_edges().size()); ++b) {
    if (mesh.boundary_edges()[b].tag != BoundaryTag::Free) continue;
    const auto nodes = space.boundary_edge_nodes(b);
    const double len = mesh.edge_length(b);
    double k[3][3] = {};
    for (size_t q = 0; q < line.points.size(); ++q) {
      const auto phi = edge_basis(line.points[q]);
      for (int a = 0; a < 3; ++a)
        for (int c = 0; c < 3; ++c) k[a][c] += line.weights[q] * len * phi[a] * phi[c];
    }
    asmb.add_block<3, 3>(nodes, nodes, k);
  }
  return m;
}

// -(g n, phi) on the obstacle for both components, g linear along each edge.
void add_boundary_load(const TaylorHoodSpace& space, const BoundaryData& bd, const std::vector<double>& g,
                       Vector& rx, Vector& ry, int offset_y) {
  const auto& line = fem::gauss_line_rule(4);
  const auto& mesh = space.mesh();
  const size_t n = bd.edges.size();
  for (size_t i = 0; i < n; ++i) {
    const int b = bd.edges[i];
    const auto nodes = space.boundary_edge_nodes(b);
    const Vec2 nrm = mesh.edge_normal(b);
    const double len = mesh.edge_length(b);
    for (size_t q = 0; q < line.points.size(); ++q) {
      const double s = line.points[q];
      const double gv = (1 - s) * g[i] + s * g[(i + 1) % n];
      const auto phi = edge_basis(s);
      for (int a = 0; a < 3; ++a) {
        const double w = -line.weights[q] * len * gv * phi[a];
        rx[nodes[a]] += w * nrm.x();
        ry[offset_y + nodes[a]] += w * nrm.y();
      }
    }
  }
}

void check_boundary_values(const BoundaryData& bd, const std::vector<double>& g) {
  if (g.size() != bd.vertices.size()) throw std::invalid_argument("boundary values do not match the obstacle loop");
}

}  // namespace

BoundaryData free_boundary(const mesh::Mesh& mesh) {
  if (!mesh.has_tag(BoundaryTag::Free)) throw std::invalid_argument("mesh has no free boundary");
  BoundaryData bd;
  bd.edges = mesh.boundary_loop_edges(BoundaryTag::Free);
  const size_t n = bd.edges.size();
  for (size_t i = 0; i < n; ++i) {
    const int v = mesh.boundary_edges()[bd.edges[i]].v[0];
    bd.vertices.push_back(v);
    bd.points.push_back(mesh.vertices()[v]);
    const Vec2 nrm = (mesh.edge_normal(bd.edges[(i + n - 1) % n]) + mesh.edge_normal(bd.edges[i])).normalized();
    bd.normals.push_back(nrm);
    bd.tangents.push_back(rot90(nrm));
  }
  return bd;
}

NormalExtension extend_normal(const TaylorHoodSpace& space, double eps3) {
  if (!(eps3 > 0.0)) throw std::invalid_argument("normal extension parameter must be positive");
  const auto& mesh = space.mesh();
  const BoundaryData bd = free_boundary(mesh);
  const int n2 = space.num_p2_nodes();
  fem::SparseSystem sys{scalar_robin_matrix(space, eps3), Vector::Zero(n2)};
  Vector rx = Vector::Zero(n2), ry = Vector::Zero(n2);
  const auto& line = fem::gauss_line_rule(4);
  for (int b : bd.edges) {
    const auto nodes = space.boundary_edge_nodes(b);
    const Vec2 nrm = mesh.edge_normal(b);
    const double len = mesh.edge_length(b);
    for (size_t q = 0; q < line.points.size(); ++q) {
      const auto phi = edge_basis(line.points[q]);
      for (int a = 0; a < 3; ++a) {
        rx[nodes[a]] += line.weights[q] * len * nrm.x() * phi[a];
        ry[nodes[a]] += line.weights[q] * len * nrm.y() * phi[a];
      }
    }
  }
  fem::DirichletData zero;
  zero.dofs = outer_nodes(space);
  zero.values.assign(zero.dofs.size(), 0.0);
  fem::apply_dirichlet(sys, zero);
  for (int d : zero.dofs) rx[d] = ry[d] = 0.0;
  fem::DirectSolver solver;
  solver.factorize(sys.matrix, &space.node_coords());
  NormalExtension ext;
  ext.field.resize(2 * n2);
  ext.field << solver.solve(rx), solver.solve(ry);

  const size_t n = bd.edges.size();
  std::vector<double> edge_kappa(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    const int b = bd.edges[i];
    const int t = mesh.boundary_triangle(b);
    const int k = mesh.boundary_local_edge(b);
    const Vec2 nrm = mesh.edge_normal(b);
    const Vec2 tau = rot90(nrm);
    for (size_t q = 0; q < line.points.size(); ++q) {
      const auto s = fem::sample_velocity(space, ext.field, t, fem::edge_barycentric(k, line.points[q]));
      const double div_tau = tau.dot(s.grad * tau);
      edge_kappa[i] += line.weights[q] * div_tau / s.value.dot(nrm);
    }
  }
  ext.kappa.resize(n);
  for (size_t i = 0; i < n; ++i) ext.kappa[i] = 0.5 * (edge_kappa[(i + n - 1) % n] + edge_kappa[i]);
  return ext;
}

ShapeGradient shape_gradient(const TaylorHoodSpace& space, const Vector& u, const Vector& v,
                             const std::vector<double>& kappa, double alpha, double gamma, double nu) {
  const auto& mesh = space.mesh();
  ShapeGradient g;
  g.boundary = free_boundary(mesh);
  const size_t n = g.boundary.edges.size();
  check_boundary_values(g.boundary, kappa);
  if (u.size() != space.num_velocity_dofs() || v.size() != space.num_velocity_dofs())
    throw std::invalid_argument("state and adjoint must live on the given space");
  g.kappa = kappa;
  const auto& line = fem::gauss_line_rule(4);
  std::vector<double> edge_term(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    const int b = g.boundary.edges[i];
    const int t = mesh.boundary_triangle(b);
    const int k = mesh.boundary_local_edge(b);
    const Vec2 nrm = mesh.edge_normal(b);
    const Vec2 tau = rot90(nrm);
    for (size_t q = 0; q < line.points.size(); ++q) {
      const auto l = fem::edge_barycentric(k, line.points[q]);
      const auto su = fem::sample_velocity(space, u, t, l);
      const auto sv = fem::sample_velocity(space, v, t, l);
      const double curl = su.grad(1, 0) - su.grad(0, 1);
      const Vec2 dnu = su.grad * nrm;
      const Vec2 dnv = sv.grad * nrm;
      const double term = -0.5 * gamma * curl * curl + dnu.dot(nu * dnv + gamma * curl * tau);
      edge_term[i] += line.weights[q] * term;
    }
  }
  g.grad_g.resize(n);
  for (size_t i = 0; i < n; ++i)
    g.grad_g[i] = alpha * kappa[i] + 0.5 * (edge_term[(i + n - 1) % n] + edge_term[i]);
  g.grad_l = g.grad_g;
  return g;
}

std::vector<double> lagrangian_gradient(const std::vector<double>& grad_g, double ell, double b, double vol,
                                        double m) {
  std::vector<double> out(grad_g);
  const double shift = ell + b * (vol - m);
  for (double& x : out) x += shift;
  return out;
}

std::string to_string(Method m) { return m == Method::AugLag ? "auglag" : "divfree"; }

Method method_from_string(const std::string& s) {
  if (s == "auglag") return Method::AugLag;
  if (s == "divfree") return Method::DivFree;
  throw std::invalid_argument("unknown method '" + s + "' (expected auglag or divfree)");
}

DeformationField deformation_robin(const TaylorHoodSpace& space, const std::vector<double>& g, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("smoothing parameter must be positive");
  const BoundaryData bd = free_boundary(space.mesh());
  check_boundary_values(bd, g);
  const int n2 = space.num_p2_nodes();
  fem::SparseSystem sys{scalar_robin_matrix(space, eps), Vector::Zero(n2)};
  Vector rx = Vector::Zero(n2), ry = Vector::Zero(n2);
  add_boundary_load(space, bd, g, rx, ry, 0);
  fem::DirichletData zero;
  zero.dofs = outer_nodes(space);
  zero.values.assign(zero.dofs.size(), 0.0);
  fem::apply_dirichlet(sys, zero);
  for (int d : zero.dofs) rx[d] = ry[d] = 0.0;
  fem::DirectSolver solver;
  solver.factorize(sys.matrix, &space.node_coords());
  DeformationField f;
  f.method = Method::AugLag;
  f.theta.resize(2 * n2);
  f.theta << solver.solve(rx), solver.solve(ry);
  return f;
}

DeformationField deformation_divfree(const TaylorHoodSpace& space, const std::vector<double>& g, double eps1,
                                     double eps2) {
  if (!(eps1 > 0.0) || !(eps2 > 0.0)) throw std::invalid_argument("smoothing parameters must be positive");
  const auto& mesh = space.mesh();
  const BoundaryData bd = free_boundary(mesh);
  check_boundary_values(bd, g);
  const int n2 = space.num_p2_nodes();
  // boundary mass on both components
  std::vector<Eigen::Triplet<double>> trip;
  const auto& line = fem::gauss_line_rule(4);
  for (int b : bd.edges) {
    const auto nodes = space.boundary_edge_nodes(b);
    const double len = mesh.edge_length(b);
    for (size_t q = 0; q < line.points.size(); ++q) {
      const auto phi = edge_basis(line.points[q]);
      for (int a = 0; a < 3; ++a)
        for (int c = 0; c < 3; ++c) {
          const double v = line.weights[q] * len * phi[a] * phi[c];
          trip.emplace_back(nodes[a], nodes[c], v);
          trip.emplace_back(n2 + nodes[a], n2 + nodes[c], v);
        }
    }
  }
  SparseMatrix mass(space.num_dofs(), space.num_dofs());
  mass.setFromTriplets(trip.begin(), trip.end());
  // the constraint row is scaled by eps2 to keep the system symmetric
  fem::SparseSystem sys{fem::assemble_a(space, eps1) + mass + eps2 * fem::assemble_d(space),
                        Vector::Zero(space.num_dofs())};
  Vector ry = Vector::Zero(space.num_dofs());
  add_boundary_load(space, bd, g, sys.rhs, ry, n2);
  sys.rhs += ry;
  fem::DirichletData zero;
  for (int c = 0; c < 2; ++c)
    for (int node : outer_nodes(space)) zero.dofs.push_back(space.velocity_dof(c, node));
  zero.values.assign(zero.dofs.size(), 0.0);
  fem::apply_dirichlet(sys, zero);
  fem::DirectSolver solver;
  const auto coords = space.dof_coords();
  solver.factorize(sys.matrix, &coords);
  const Vector x = solver.solve(sys.rhs);
  DeformationField f;
  f.method = Method::DivFree;
  f.theta = x.head(space.num_velocity_dofs());
  f.pressure = x.tail(space.num_pressure_dofs());
  return f;
}

std::vector<Vec2> vertex_values(const TaylorHoodSpace& space, const Vector& theta) {
  if (theta.size() != space.num_velocity_dofs()) throw std::invalid_argument("field has wrong length");
  const int n2 = space.num_p2_nodes();
  std::vector<Vec2> out(space.num_vertices());
  for (int v = 0; v < space.num_vertices(); ++v) out[v] = Vec2(theta[v], theta[n2 + v]);
  return out;
}

double directional_derivative(const mesh::Mesh& mesh, const std::vector<double>& g,
                              const std::vector<Vec2>& displacement) {
  const BoundaryData bd = free_boundary(mesh);
  check_boundary_values(bd, g);
  if (static_cast<int>(displacement.size()) != mesh.num_vertices())
    throw std::invalid_argument("displacement must have one entry per vertex");
  const auto& line = fem::gauss_line_rule(2);
  const size_t n = bd.edges.size();
  double s = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const int b = bd.edges[i];
    const auto& e = mesh.boundary_edges()[b];
    const Vec2 nrm = mesh.edge_normal(b);
    const double t0 = displacement[e.v[0]].dot(nrm), t1 = displacement[e.v[1]].dot(nrm);
    for (size_t q = 0; q < line.points.size(); ++q) {
      const double x = line.points[q];
      s += line.weights[q] * mesh.edge_length(b) * ((1 - x) * g[i] + x * g[(i + 1) % n]) * ((1 - x) * t0 + x * t1);
    }
  }
  return s;
}

double boundary_norm_squared(const TaylorHoodSpace& space, const Vector& theta) {
  if (theta.size() != space.num_velocity_dofs()) throw std::invalid_argument("field has wrong length");
  const auto& mesh = space.mesh();
  const int n2 = space.num_p2_nodes();
  const auto& line = fem::gauss_line_rule(4);
  double s = 0.0;
  for (int b = 0; b < static_cast<int>(mesh.boundary_edges().size()); ++b) {
    if (mesh.boundary_edges()[b].tag != BoundaryTag::Free) continue;
    const auto nodes = space.boundary_edge_nodes(b);
    for (size_t q = 0; q < line.points.size(); ++q) {
      const auto phi = edge_basis(line.points[q]);
      Vec2 val = Vec2::Zero();
      for (int a = 0; a < 3; ++a) val += phi[a] * Vec2(theta[nodes[a]], theta[n2 + nodes[a]]);
      s += line.weights[q] * mesh.edge_length(b) * val.squaredNorm();
    }
  }
  return s;
}

double divergence_residual(const TaylorHoodSpace& space, const Vector& theta) {
  Vector x = Vector::Zero(space.num_dofs());
  x.head(space.num_velocity_dofs()) = theta;
  return (fem::assemble_d(space) * x).tail(space.num_pressure_dofs()).lpNorm<Eigen::Infinity>();
}

void write_shape_gradient_csv(const std::string& path, const ShapeGradient& g) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "x,y,kappa,gradG,gradL\n" << std::setprecision(12);
  for (size_t i = 0; i < g.boundary.points.size(); ++i)
    f << g.boundary.points[i].x() << ',' << g.boundary.points[i].y() << ',' << g.kappa[i] << ',' << g.grad_g[i]
      << ',' << g.grad_l[i] << '\n';
}

}  // namespace vortishape::shape
