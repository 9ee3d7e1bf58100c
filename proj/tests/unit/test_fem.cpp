#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <random>

#include "vortishape/fem/assembly.hpp"
#include "vortishape/fem/fields.hpp"
#include "vortishape/fem/linear_solver.hpp"
#include "vortishape/fem/quadrature.hpp"
#include "vortishape/mesh/mesh.hpp"

using namespace vortishape;
using namespace vortishape::fem;
using Catch::Approx;
using mesh::Mesh;
using mesh::Rect;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

Mesh unit_square(double h) { return mesh::generate_rectangle_mesh(Rect{Vec2(0, 0), Vec2(1, 1)}, h); }

Vector random_vector(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = d(gen);
  return v;
}

// Zero the Dirichlet velocity dofs and the pressure block.
Vector admissible(const TaylorHoodSpace& s, Vector v) {
  for (int d : homogeneous_velocity_dirichlet(s).dofs) v[d] = 0.0;
  v.tail(s.num_pressure_dofs()).setZero();
  return v;
}

Vector pad(const TaylorHoodSpace& s, const Vector& u) {
  Vector x = Vector::Zero(s.num_dofs());
  x.head(s.num_velocity_dofs()) = u;
  return x;
}

Vec2 poiseuille(const Vec2& x) { return Vec2(1.2 * (0.25 - x.y() * x.y()), 0.0); }

}  // namespace

TEST_CASE("triangle rules integrate monomials exactly") {
  for (const TriangleRule* rule : {&triangle_rule_deg5(), &triangle_rule_deg8()}) {
    double wsum = 0.0;
    for (double w : rule->weights) wsum += w;
    CHECK(wsum == Approx(1.0).epsilon(1e-14));
    for (int a = 0; a <= rule->degree; ++a)
      for (int b = 0; a + b <= rule->degree; ++b)
        for (int c = 0; a + b + c <= rule->degree; ++c) {
          double q = 0.0;
          for (size_t i = 0; i < rule->points.size(); ++i) {
            const auto& l = rule->points[i];
            q += rule->weights[i] * std::pow(l[0], a) * std::pow(l[1], b) * std::pow(l[2], c);
          }
          // mean over the triangle of l0^a l1^b l2^c
          const double exact = 2.0 * factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 2);
          CHECK(q == Approx(exact).epsilon(1e-13));
        }
  }
}

TEST_CASE("gauss line rules") {
  for (int n = 1; n <= 5; ++n) {
    const auto& r = gauss_line_rule(n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double q = 0.0;
      for (size_t i = 0; i < r.points.size(); ++i) q += r.weights[i] * std::pow(r.points[i], k);
      CHECK(q == Approx(1.0 / (k + 1)).epsilon(1e-14));
    }
  }
}

TEST_CASE("dof counts") {
  const Mesh m = unit_square(0.25);
  TaylorHoodSpace s(m);
  CHECK(s.num_velocity_dofs() == 2 * (m.num_vertices() + m.num_edges()));
  CHECK(s.num_pressure_dofs() == m.num_vertices());
  // Euler: V - E + T = 1 for a simply connected triangulation
  CHECK(m.num_vertices() - m.num_edges() + m.num_triangles() == 1);
}

TEST_CASE("P2 basis is nodal and sums to one") {
  const std::array<std::array<double, 3>, 6> nodes{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {.5, .5, 0}, {0, .5, .5}, {.5, 0, .5}}};
  for (int i = 0; i < 6; ++i) {
    const auto v = p2_values(nodes[i]);
    for (int j = 0; j < 6; ++j) CHECK(v[j] == Approx(i == j ? 1.0 : 0.0).margin(1e-15));
  }
  const auto v = p2_values({0.2, 0.3, 0.5});
  double sum = 0.0;
  for (double x : v) sum += x;
  CHECK(sum == Approx(1.0));
}

TEST_CASE("stiffness form") {
  const Mesh m = unit_square(0.2);
  TaylorHoodSpace s(m);
  const SparseMatrix a = assemble_a(s, 1.0);
  const Vector c = pad(s, interpolate_velocity(s, [](const Vec2&) { return Vec2(3.0, -1.0); }));
  CHECK((a * c).norm() < 1e-12);
  const Vector x = pad(s, interpolate_velocity(s, [](const Vec2& p) { return Vec2(p.x(), 0.0); }));
  CHECK(x.dot(a * x) == Approx(1.0).epsilon(1e-12));
  CHECK((SparseMatrix(a.transpose()) - a).norm() < 1e-13);
  const SparseMatrix a2 = assemble_a(s, 0.01);
  CHECK(x.dot(a2 * x) == Approx(0.01).epsilon(1e-12));
}

TEST_CASE("stiffness matches the classical P1 element") {
  // one triangle (0,0),(2,0),(0,1); hat functions are exactly representable in P2
  std::vector<Vec2> x{{0, 0}, {2, 0}, {0, 1}};
  std::vector<mesh::BoundaryEdge> b{{{0, 1}, BoundaryTag::Wall}, {{1, 2}, BoundaryTag::Wall}, {{2, 0}, BoundaryTag::Wall}};
  Mesh m(x, {{0, 1, 2}}, b, 1.0);
  TaylorHoodSpace s(m);
  const SparseMatrix a = assemble_a(s, 1.0);
  // K_ij = (grad l_i . grad l_j) * area, grads by hand
  const Vec2 g[3] = {Vec2(-0.5, -1.0), Vec2(0.5, 0.0), Vec2(0.0, 1.0)};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Vector hi = Vector::Zero(s.num_dofs()), hj = Vector::Zero(s.num_dofs());
      auto hat = [&](int k, Vector& v) {
        v[k] = 1.0;
        for (int e = 0; e < 3; ++e) {
          const auto& ed = m.edges()[e];
          if (ed[0] == k || ed[1] == k) v[3 + e] = 0.5;
        }
      };
      hat(i, hi);
      hat(j, hj);
      CHECK(hi.dot(a * hj) == Approx(g[i].dot(g[j]) * 1.0).margin(1e-14));
    }
}

TEST_CASE("divergence form") {
  const Mesh m = unit_square(0.2);
  TaylorHoodSpace s(m);
  const SparseMatrix d = assemble_d(s);
  const Vector rot = pad(s, interpolate_velocity(s, [](const Vec2& p) { return Vec2(-p.y(), p.x()); }));
  CHECK((d * rot).tail(s.num_pressure_dofs()).norm() < 1e-13);
  const Vector ux = pad(s, interpolate_velocity(s, [](const Vec2& p) { return Vec2(p.x(), 0.0); }));
  Vector q = Vector::Zero(s.num_dofs());
  q.tail(s.num_pressure_dofs()).setOnes();
  CHECK(q.dot(d * ux) == Approx(-1.0).epsilon(1e-12));
  CHECK((SparseMatrix(d.transpose()) - d).norm() == 0.0);
}

TEST_CASE("outflow boundary form") {
  const Mesh m = unit_square(0.25);
  TaylorHoodSpace s(m);
  const Vector e1 = interpolate_velocity(s, [](const Vec2&) { return Vec2(1.0, 0.0); });
  const SparseMatrix c = assemble_outflow_c(s, e1);
  CHECK(pad(s, e1).dot(c * pad(s, e1)) == Approx(1.0).epsilon(1e-13));
  const Vector tangential = interpolate_velocity(s, [](const Vec2&) { return Vec2(0.0, 1.0); });
  CHECK(assemble_outflow_c(s, tangential).norm() < 1e-15);
}

TEST_CASE("outflow form against a fine line rule") {
  const Mesh m = mesh::generate_channel_mesh(Rect{}, Vec2(0.325, 0), 0.13, 0.1);
  TaylorHoodSpace s(m);
  const Vector w = random_vector(s.num_velocity_dofs(), 3);
  const Vector u = random_vector(s.num_velocity_dofs(), 4);
  const Vector v = random_vector(s.num_velocity_dofs(), 5);
  const double assembled = pad(s, v).dot(assemble_outflow_c(s, w) * pad(s, u));
  // independent oracle: composite Simpson with 2000 panels per edge
  double oracle = 0.0;
  const int n2 = s.num_p2_nodes();
  for (int b = 0; b < static_cast<int>(m.boundary_edges().size()); ++b) {
    if (m.boundary_edges()[b].tag != BoundaryTag::Outflow) continue;
    const auto nodes = s.boundary_edge_nodes(b);
    const Vec2 n = m.edge_normal(b);
    auto eval = [&](const Vector& f, double t) {
      const double p0 = (1 - t) * (1 - 2 * t), p1 = t * (2 * t - 1), pm = 4 * t * (1 - t);
      return Vec2(p0 * f[nodes[0]] + p1 * f[nodes[1]] + pm * f[nodes[2]],
                  p0 * f[n2 + nodes[0]] + p1 * f[n2 + nodes[1]] + pm * f[n2 + nodes[2]]);
    };
    const int panels = 2000;
    double acc = 0.0;
    for (int i = 0; i <= 2 * panels; ++i) {
      const double t = double(i) / (2 * panels);
      const double wgt = (i == 0 || i == 2 * panels) ? 1 : (i % 2 ? 4 : 2);
      acc += wgt * eval(w, t).dot(n) * eval(u, t).dot(eval(v, t));
    }
    oracle += acc / (6.0 * panels) * m.edge_length(b);
  }
  CHECK(assembled == Approx(oracle).epsilon(1e-10));
}

TEST_CASE("convection form") {
  const Mesh m = mesh::generate_channel_mesh(Rect{}, Vec2(0.325, 0), 0.13, 0.1);
  TaylorHoodSpace s(m);
  CHECK(assemble_b(s, Vector::Zero(s.num_velocity_dofs())).norm() == 0.0);
  // (w . grad) u for w = (1,0), u = (x^2, xy): (2x, y)
  const Mesh sq = unit_square(0.25);
  TaylorHoodSpace ss(sq);
  const Vector w = interpolate_velocity(ss, [](const Vec2&) { return Vec2(1.0, 0.0); });
  const Vector u = interpolate_velocity(ss, [](const Vec2& p) { return Vec2(p.x() * p.x(), p.x() * p.y()); });
  const Vector v = interpolate_velocity(ss, [](const Vec2&) { return Vec2(1.0, 1.0); });
  // int (2x + y) over the unit square = 1.5
  CHECK(pad(ss, v).dot(assemble_b(ss, w) * pad(ss, u)) == Approx(1.5).epsilon(1e-12));
  // transport form swaps the first two arguments
  CHECK(pad(ss, v).dot(assemble_b_transport(ss, u) * pad(ss, w)) == Approx(1.5).epsilon(1e-12));
}

TEST_CASE("trilinear identities for a divergence-free field") {
  const Mesh m = mesh::generate_channel_mesh(Rect{}, Vec2(0.325, 0), 0.13, 1.0 / 20);
  TaylorHoodSpace s(m);
  // exactly divergence-free and representable in P2
  const Vector w = interpolate_velocity(s, [](const Vec2& p) { return Vec2(1.0 + p.y() * p.y(), p.x() * p.x()); });
  Vector q = Vector::Zero(s.num_dofs());
  REQUIRE((assemble_d(s) * pad(s, w)).tail(s.num_pressure_dofs()).lpNorm<Eigen::Infinity>() < 1e-13);
  const Vector u = admissible(s, random_vector(s.num_dofs(), 11));
  const Vector v = admissible(s, random_vector(s.num_dofs(), 12));
  const SparseMatrix b = assemble_b(s, w);
  const SparseMatrix c = assemble_outflow_c(s, w);
  CHECK(v.dot(b * u) + u.dot(b * v) == Approx(v.dot(c * u)).margin(1e-8));
  CHECK(u.dot(b * u) == Approx(0.5 * u.dot(c * u)).margin(1e-8));
}

TEST_CASE("trilinear quadrature is exact with the degree-5 rule") {
  const Mesh m = mesh::generate_channel_mesh(Rect{}, Vec2(0.325, 0), 0.13, 0.1);
  TaylorHoodSpace s(m);
  const Vector w = random_vector(s.num_velocity_dofs(), 21);
  const SparseMatrix b5 = assemble_b(s, w, triangle_rule_deg5());
  const SparseMatrix b8 = assemble_b(s, w, triangle_rule_deg8());
  CHECK((b5 - b8).norm() < 1e-12 * b8.norm());
  const SparseMatrix n5 = assemble_b_transport(s, w, triangle_rule_deg5());
  const SparseMatrix n8 = assemble_b_transport(s, w, triangle_rule_deg8());
  CHECK((n5 - n8).norm() < 1e-12 * n8.norm());
}

TEST_CASE("jacobian is the derivative of the operator") {
  const Mesh m = mesh::generate_channel_mesh(Rect{}, Vec2(0.325, 0), 0.13, 0.1);
  TaylorHoodSpace s(m);
  const double nu = 0.05;
  const Vector x = random_vector(s.num_dofs(), 31);
  const Vector dx = random_vector(s.num_dofs(), 32);
  SparseMatrix j;
  assemble_jacobian(s, nu, x.head(s.num_velocity_dofs()), true, j);
  // operator is quadratic: central differences are exact up to roundoff
  const double eps = 1e-3;
  const Vector fd = (assemble_operator(s, nu, x + eps * dx) - assemble_operator(s, nu, x - eps * dx)) / (2 * eps);
  CHECK((j * dx - fd).lpNorm<Eigen::Infinity>() < 1e-9 * fd.lpNorm<Eigen::Infinity>());
}

TEST_CASE("jacobian splits into the separate forms") {
  const Mesh m = mesh::generate_channel_mesh(Rect{}, Vec2(0.325, 0), 0.13, 0.1);
  TaylorHoodSpace s(m);
  const double nu = 0.3;
  const Vector w = random_vector(s.num_velocity_dofs(), 41);
  SparseMatrix j, p;
  assemble_jacobian(s, nu, w, true, j);
  assemble_jacobian(s, nu, w, false, p);
  const SparseMatrix ref = assemble_a(s, nu) + assemble_b(s, w) + assemble_b_transport(s, w) -
                           0.5 * (assemble_outflow_c(s, w) + assemble_outflow_c_transport(s, w)) + assemble_d(s);
  const SparseMatrix picard = assemble_a(s, nu) + assemble_b(s, w) - 0.5 * assemble_outflow_c(s, w) + assemble_d(s);
  CHECK((j - ref).norm() < 1e-12 * ref.norm());
  CHECK((p - picard).norm() < 1e-12 * picard.norm());
}

TEST_CASE("newton right-hand side reproduces the residual") {
  const Mesh m = mesh::generate_channel_mesh(Rect{}, Vec2(0.325, 0), 0.13, 0.1);
  TaylorHoodSpace s(m);
  const double nu = 0.01;
  const Vector x = random_vector(s.num_dofs(), 51);
  SparseMatrix j;
  assemble_jacobian(s, nu, x.head(s.num_velocity_dofs()), true, j);
  const Vector lhs = j * x - assemble_newton_rhs(s, x.head(s.num_velocity_dofs()));
  const Vector op = assemble_operator(s, nu, x);
  CHECK((lhs - op).lpNorm<Eigen::Infinity>() < 1e-11 * op.lpNorm<Eigen::Infinity>());
}

TEST_CASE("assembly is deterministic") {
  const Mesh m = mesh::generate_channel_mesh(Rect{}, Vec2(0.325, 0), 0.13, 0.1);
  TaylorHoodSpace s(m);
  const Vector w = random_vector(s.num_velocity_dofs(), 61);
  SparseMatrix j1, j2;
  assemble_jacobian(s, 0.01, w, true, j1);
  assemble_jacobian(s, 0.01, w, true, j2);
  REQUIRE(j1.nonZeros() == j2.nonZeros());
  CHECK(std::memcmp(j1.valuePtr(), j2.valuePtr(), sizeof(double) * j1.nonZeros()) == 0);
  const Mesh m2 = mesh::generate_channel_mesh(Rect{}, Vec2(0.325, 0), 0.13, 0.1);
  CHECK(m2.vertices() == m.vertices());
  CHECK(m2.triangles() == m.triangles());
}

TEST_CASE("dirichlet data") {
  const Mesh m = mesh::generate_channel_mesh(Rect{}, Vec2(0.325, 0), 0.13, 0.1);
  TaylorHoodSpace s(m);
  const auto g = velocity_dirichlet(s, [](const Vec2& x, BoundaryTag t) {
    return t == BoundaryTag::Inflow ? poiseuille(x) : Vec2(0.0, 0.0);
  });
  const int n2 = s.num_p2_nodes();
  bool found_origin = false;
  std::vector<char> fixed(s.num_dofs(), 0);
  for (size_t i = 0; i < g.dofs.size(); ++i) {
    fixed[g.dofs[i]] = 1;
    const int node = g.dofs[i] % n2;
    const Vec2 x = s.node_coords()[node];
    if (x.norm() < 1e-14 && g.dofs[i] < n2) {
      found_origin = true;
      CHECK(g.values[i] == Approx(0.3));
    }
    if (std::abs(std::abs(x.y()) - 0.5) < 1e-14) CHECK(g.values[i] == 0.0);
  }
  CHECK(found_origin);
  // outflow interior nodes stay free
  for (int node = 0; node < n2; ++node) {
    const Vec2 x = s.node_coords()[node];
    if (std::abs(x.x() - 2.0) < 1e-14 && std::abs(x.y()) < 0.5 - 1e-9) CHECK_FALSE(fixed[node]);
  }
}

TEST_CASE("symmetric elimination") {
  SparseMatrix a(3, 3);
  a.insert(0, 0) = 4;
  a.insert(0, 1) = 1;
  a.insert(1, 0) = 1;
  a.insert(1, 1) = 3;
  a.insert(1, 2) = 1;
  a.insert(2, 1) = 1;
  a.insert(2, 2) = 2;
  SparseSystem sys{a, Vector::Constant(3, 1.0)};
  apply_dirichlet(sys, DirichletData{{0}, {2.0}});
  CHECK(sys.matrix.coeff(0, 0) == 1.0);
  CHECK(sys.matrix.coeff(0, 1) == 0.0);
  CHECK(sys.matrix.coeff(1, 0) == 0.0);
  CHECK(sys.rhs[0] == 2.0);
  CHECK(sys.rhs[1] == -1.0);
  const Vector x = solve_sparse(sys);
  CHECK(x[0] == Approx(2.0));
  // remaining 2x2: [[3,1],[1,2]] y = (-1, 1)
  CHECK(x[1] == Approx(-0.6));
  CHECK(x[2] == Approx(0.8));
}

TEST_CASE("direct solver contracts") {
  SparseMatrix id(3, 3);
  for (int i = 0; i < 3; ++i) id.insert(i, i) = 1.0;
  const Vector b(Eigen::Vector3d(1, 2, 3));
  CHECK(solve_sparse({id, b}) == b);
  SparseMatrix a(2, 2);
  a.insert(0, 0) = 2;
  a.insert(0, 1) = 1;
  a.insert(1, 0) = 1;
  a.insert(1, 1) = 2;
  double res = 1.0;
  const Vector x = solve_sparse({a, Vector::Constant(2, 3.0)}, &res);
  CHECK(x[0] == Approx(1.0));
  CHECK(x[1] == Approx(1.0));
  CHECK(res < 1e-14);
  SparseMatrix sing(2, 2);
  sing.insert(0, 0) = 1;
  sing.insert(1, 0) = 1;
  sing.insert(0, 1) = 1;
  sing.insert(1, 1) = 1;
  CHECK_THROWS_AS(solve_sparse({sing, Vector::Ones(2)}), SingularMatrixError);
  CHECK_THROWS(solve_sparse({a, Vector::Ones(3)}));
}

TEST_CASE("transpose solve") {
  SparseMatrix a(2, 2);
  a.insert(0, 0) = 1;
  a.insert(0, 1) = 2;
  a.insert(1, 0) = 0.5;
  a.insert(1, 1) = 3;
  DirectSolver s;
  s.factorize(a);
  const Vector b = Eigen::Vector2d(1, -1);
  CHECK((a * s.solve(b) - b).norm() < 1e-14);
  CHECK((SparseMatrix(a.transpose()) * s.solve_transpose(b) - b).norm() < 1e-14);
}

TEST_CASE("stokes system residual at h = 1/10") {
  const Mesh m = mesh::generate_channel_mesh(Rect{}, Vec2(0.325, 0), 0.13, 0.1);
  TaylorHoodSpace s(m);
  SparseSystem sys{assemble_a(s, 0.01) + assemble_d(s), Vector::Zero(s.num_dofs())};
  apply_dirichlet(sys, velocity_dirichlet(s, [](const Vec2& x, BoundaryTag t) {
                    return t == BoundaryTag::Inflow ? poiseuille(x) : Vec2(0, 0);
                  }));
  double res = 1.0;
  solve_sparse(sys, &res);
  CHECK(res < 1e-9);
}

TEST_CASE("curl of simple fields") {
  const Mesh m = mesh::generate_channel_mesh(Rect{}, Vec2(0.325, 0), 0.13, 0.1);
  TaylorHoodSpace s(m);
  const Vector rot = interpolate_velocity(s, [](const Vec2& p) { return Vec2(-p.y(), p.x()); });
  const Vector c = curl_p1(s, rot);
  CHECK((c.array() - 2.0).abs().maxCoeff() < 1e-10);
  CHECK(vorticity_squared(s, rot) == Approx(4.0 * mesh::volume(m)).epsilon(1e-12));
  // gradient of x^2 y - y^2 / 3 + x y
  const Vector grad = interpolate_velocity(s, [](const Vec2& p) {
    return Vec2(2 * p.x() * p.y() + p.y(), p.x() * p.x() - 2 * p.y() / 3 + p.x());
  });
  for (const auto& t : curl_per_triangle(s, grad))
    for (double v : t) CHECK(std::abs(v) < 1e-11);
  const Vector pois = interpolate_velocity(s, poiseuille);
  const Vector cp = curl_p1(s, pois);
  for (int v = 0; v < m.num_vertices(); ++v) CHECK(cp[v] == Approx(2.4 * m.vertices()[v].y()).margin(1e-10));
}

TEST_CASE("normal derivative") {
  const Mesh m = mesh::generate_rectangle_mesh(Rect{}, 0.1);
  TaylorHoodSpace s(m);
  const Vector u = interpolate_velocity(s, [](const Vec2& p) { return Vec2(p.x() * p.x(), 0.0); });
  for (const auto& e : normal_derivative(s, u, BoundaryTag::Outflow))
    for (const auto& v : e.values) CHECK((v - Vec2(4.0, 0.0)).norm() < 1e-11);
  const Vector c = interpolate_velocity(s, [](const Vec2&) { return Vec2(1.0, 2.0); });
  for (const auto& e : normal_derivative(s, c, BoundaryTag::Wall))
    for (const auto& v : e.values) CHECK(v.norm() < 1e-12);
  const Vector lin = interpolate_velocity(s, [](const Vec2& p) { return Vec2(p.y(), 0.0); });
  for (const auto& e : normal_derivative(s, lin, BoundaryTag::Wall)) {
    const Vec2 n = m.edge_normal(e.edge);
    if (n.y() > 0.5)
      for (const auto& v : e.values) CHECK((v - Vec2(1.0, 0.0)).norm() < 1e-12);
  }
  CHECK_THROWS(normal_derivative(s, u, BoundaryTag::Free));
}

TEST_CASE("norms") {
  const Mesh m = unit_square(0.25);
  TaylorHoodSpace s(m);
  const auto z = velocity_norms(s, Vector::Zero(s.num_velocity_dofs()));
  CHECK(z.l2 == 0.0);
  CHECK(z.h1 == 0.0);
  CHECK(p1_norms(s, Vector::Ones(s.num_vertices())).l2 == Approx(1.0).epsilon(1e-13));
  const Vector x = interpolate_p1(s, [](const Vec2& p) { return p.x(); });
  const auto nx = p1_norms(s, x);
  CHECK(nx.l2 == Approx(1.0 / std::sqrt(3.0)).epsilon(1e-13));
  CHECK(nx.h1_semi == Approx(1.0).epsilon(1e-13));
  Vector q(s.num_p2_nodes());
  for (int i = 0; i < s.num_p2_nodes(); ++i) q[i] = std::pow(s.node_coords()[i].x(), 2);
  // int x^4 = 1/5, int (2x)^2 = 4/3
  const auto nq = p2_scalar_norms(s, q);
  CHECK(nq.l2 == Approx(std::sqrt(0.2)).epsilon(1e-13));
  CHECK(nq.h1_semi == Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-13));
  const Vector u = interpolate_velocity(s, [](const Vec2& p) { return Vec2(p.x(), p.y()); });
  const auto e = velocity_error(s, u, [](const Vec2& p) { return Vec2(p.x(), p.y()); },
                                [](const Vec2&) { return Eigen::Matrix2d::Identity(); });
  CHECK(e.l2 < 1e-13);
  CHECK(e.h1 < 1e-13);
}

TEST_CASE("point locator") {
  const Mesh m = mesh::generate_channel_mesh(Rect{}, Vec2(0.325, 0), 0.13, 0.1);
  TaylorHoodSpace s(m);
  PointLocator loc(m);
  const Vector u = interpolate_velocity(s, poiseuille);
  for (const Vec2& p : {Vec2(1.0, 0.2), Vec2(0.05, -0.45), Vec2(1.99, 0.0), Vec2(0.6, 0.1)}) {
    const auto hit = loc.locate(p);
    REQUIRE(hit.tri >= 0);
    CHECK(hit.inside);
    CHECK((sample_velocity(s, u, hit.tri, hit.bary).value - poiseuille(p)).norm() < 1e-12);
  }
  const auto out = loc.locate(Vec2(0.325, 0.0));
  CHECK_FALSE(out.inside);
  CHECK(out.tri >= 0);
}
