#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "vortishape/fem/assembly.hpp"
#include "vortishape/fem/fields.hpp"
#include "vortishape/mesh/mesh.hpp"
#include "vortishape/shape/shape.hpp"

using namespace vortishape;
using namespace vortishape::shape;
using Catch::Approx;
using mesh::Mesh;
using mesh::Rect;

namespace {

const Rect kRect{};

Mesh channel(double h, double r = 0.13, Vec2 c = Vec2(0.325, 0.0)) {
  return mesh::generate_channel_mesh(kRect, c, r, h);
}

double max_rel_kappa_error(double h, double eps3) {
  const double r = 0.13;
  const Mesh m = channel(h, r);
  const TaylorHoodSpace s(m);
  const auto ext = extend_normal(s, eps3);
  double err = 0.0;
  for (double k : ext.kappa) err = std::max(err, std::abs(std::abs(k) * r - 1.0));
  return err;
}

// Radial bump centred on the obstacle, zero away from it.
std::vector<Vec2> bump_field(const Mesh& m, const Vec2& dir) {
  std::vector<Vec2> out(m.num_vertices(), Vec2::Zero());
  for (int i = 0; i < m.num_vertices(); ++i) {
    const double d = (m.vertices()[i] - Vec2(0.325, 0.0)).norm();
    if (d < 0.3) {
      const double c = std::cos(0.5 * M_PI * std::max(0.0, d - 0.13) / 0.17);
      out[i] = c * c * dir;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("curvature of a circular obstacle", "[shape]") {
  const Mesh m = channel(1.0 / 30);
  const TaylorHoodSpace s(m);
  const auto ext = extend_normal(s, 1e-3);
  const auto bd = free_boundary(m);
  REQUIRE(ext.kappa.size() == bd.vertices.size());
  for (double k : ext.kappa) CHECK(k == Approx(-1.0 / 0.13).epsilon(0.05));
  // the extension reproduces the normal on the obstacle
  const auto vals = vertex_values(s, ext.field);
  for (size_t i = 0; i < bd.vertices.size(); ++i) CHECK((vals[bd.vertices[i]] - bd.normals[i]).norm() < 0.05);
  CHECK_THROWS_AS(extend_normal(s, 0.0), std::invalid_argument);
}

TEST_CASE("curvature error decreases with the mesh size", "[shape]") {
  const double e1 = max_rel_kappa_error(1.0 / 15, 1e-3);
  const double e2 = max_rel_kappa_error(1.0 / 30, 1e-3);
  CHECK(e2 < e1);
  CHECK(std::log2(e1 / e2) >= 1.0);
}

TEST_CASE("doubling the radius halves the curvature", "[shape]") {
  const Mesh small = channel(1.0 / 40, 0.1, Vec2(0.6, 0.0));
  const Mesh big = channel(1.0 / 40, 0.2, Vec2(0.6, 0.0));
  const TaylorHoodSpace s1(small), s2(big);
  auto mean = [](const std::vector<double>& v) {
    double a = 0.0;
    for (double x : v) a += x;
    return a / v.size();
  };
  const double k1 = mean(extend_normal(s1, 1e-3).kappa);
  const double k2 = mean(extend_normal(s2, 1e-3).kappa);
  CHECK(k2 / k1 == Approx(0.5).epsilon(0.03));
}

TEST_CASE("straight obstacle sides have no curvature", "[shape]") {
  const double h = 1.0 / 30;
  const std::vector<Vec2> square{Vec2(0.4, -0.15), Vec2(0.7, -0.15), Vec2(0.7, 0.15), Vec2(0.4, 0.15)};
  std::vector<Vec2> poly;
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < 9; ++j) poly.push_back(square[k] + (square[(k + 1) % 4] - square[k]) * (j / 9.0));
  const Mesh m = mesh::generate_channel_mesh(kRect, poly, h);
  const TaylorHoodSpace s(m);
  const auto ext = extend_normal(s, 1e-3);
  const auto bd = free_boundary(m);
  int checked = 0;
  for (size_t i = 0; i < bd.points.size(); ++i) {
    double dc = 1e9;
    for (const auto& c : square) dc = std::min(dc, (bd.points[i] - c).norm());
    if (dc < 3.5 * h) continue;
    CHECK(std::abs(ext.kappa[i]) < 0.5);
    ++checked;
  }
  CHECK(checked >= 8);
}

TEST_CASE("shape gradient term isolation", "[shape]") {
  const Mesh m = channel(1.0 / 20);
  const TaylorHoodSpace s(m);
  const auto ext = extend_normal(s, 1e-3);
  const Vector zero = Vector::Zero(s.num_velocity_dofs());

  SECTION("without flow only curvature is left") {
    const auto g = shape_gradient(s, zero, zero, ext.kappa, 7.0, 2.0, 0.01);
    for (size_t i = 0; i < g.grad_g.size(); ++i) CHECK(g.grad_g[i] == Approx(7.0 * ext.kappa[i]).margin(1e-12));
    CHECK(g.grad_l == g.grad_g);
  }
  SECTION("viscous term alone") {
    // u = v = (x, -y): du/dn . dv/dn = |n|^2 = 1
    const Vector u = fem::interpolate_velocity(s, [](const Vec2& x) { return Vec2(x.x(), -x.y()); });
    const auto g = shape_gradient(s, u, u, ext.kappa, 0.0, 0.0, 0.03);
    for (double x : g.grad_g) CHECK(x == Approx(0.03).margin(1e-12));
  }
  SECTION("vorticity terms alone") {
    // u = (y, 0): curl = -1, du/dn = (n_y, 0), so -1/2 + du/dn . (-tau) = n_y^2 - 1/2
    const Vector u = fem::interpolate_velocity(s, [](const Vec2& x) { return Vec2(x.y(), 0.0); });
    const auto g = shape_gradient(s, u, zero, ext.kappa, 0.0, 1.0, 0.0);
    const auto& bd = g.boundary;
    const size_t n = bd.edges.size();
    for (size_t i = 0; i < n; ++i) {
      const double a = m.edge_normal(bd.edges[(i + n - 1) % n]).y(), b = m.edge_normal(bd.edges[i]).y();
      CHECK(g.grad_g[i] == Approx(0.5 * (a * a + b * b) - 0.5).margin(1e-12));
    }
  }
  SECTION("size checks") {
    CHECK_THROWS_AS(shape_gradient(s, zero, zero, std::vector<double>(3, 0.0), 1, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(shape_gradient(s, Vector::Zero(4), zero, ext.kappa, 1, 1, 1), std::invalid_argument);
  }
}

TEST_CASE("Lagrangian gradient shift", "[shape]") {
  const std::vector<double> g{1.0, -2.0, 0.5};
  CHECK(lagrangian_gradient(g, 0.0, 0.0, 3.0, 1.0) == g);
  const auto a = lagrangian_gradient(g, 4.0, 5.0, 2.0, 2.0);
  for (size_t i = 0; i < g.size(); ++i) CHECK(a[i] == Approx(g[i] + 4.0));
  const auto b = lagrangian_gradient(g, 54.0, 1.0, 1.01, 1.0);
  for (size_t i = 0; i < g.size(); ++i) CHECK(b[i] == Approx(g[i] + 54.01));
}

TEST_CASE("method names", "[shape]") {
  CHECK(method_from_string("auglag") == Method::AugLag);
  CHECK(method_from_string(to_string(Method::DivFree)) == Method::DivFree);
  CHECK_THROWS_AS(method_from_string("newton"), std::invalid_argument);
}

TEST_CASE("Robin deformation field", "[shape]") {
  const Mesh m = channel(1.0 / 30);
  const TaylorHoodSpace s(m);
  const auto bd = free_boundary(m);
  const size_t n = bd.vertices.size();

  SECTION("zero gradient gives zero field") {
    const auto f = deformation_robin(s, std::vector<double>(n, 0.0), 1e-2);
    CHECK(f.theta.lpNorm<Eigen::Infinity>() == 0.0);
  }
  SECTION("constant gradient moves the obstacle radially") {
    const double c = 2.0;
    double prev = 1e9;
    for (double eps : {1e-2, 1e-3}) {
      const auto f = deformation_robin(s, std::vector<double>(n, c), eps);
      const auto vals = vertex_values(s, f.theta);
      double err = 0.0;
      for (size_t i = 0; i < n; ++i) {
        const Vec2 t = vals[bd.vertices[i]];
        // positive gradient: theta.n < 0, i.e. away from the centre
        CHECK(t.dot(bd.normals[i]) < 0.0);
        const Vec2 radial = (bd.points[i] - Vec2(0.325, 0.0)).normalized();
        err = std::max(err, (t - c * radial).norm() / c);
      }
      CHECK(err < prev);
      prev = err;
    }
    CHECK(prev < 0.05);
  }
  SECTION("outer boundary stays fixed") {
    const auto f = deformation_robin(s, std::vector<double>(n, 1.0), 1e-2);
    const auto vals = vertex_values(s, f.theta);
    for (const auto& e : m.boundary_edges())
      if (e.tag != BoundaryTag::Free) CHECK(vals[e.v[0]].norm() == 0.0);
  }
  CHECK_THROWS_AS(deformation_robin(s, std::vector<double>(n, 0.0), -1.0), std::invalid_argument);
  CHECK_THROWS_AS(deformation_robin(s, std::vector<double>(n + 1, 0.0), 1e-2), std::invalid_argument);
}

TEST_CASE("divergence-free deformation field", "[shape]") {
  const Mesh m = channel(1.0 / 30);
  const TaylorHoodSpace s(m);
  const auto bd = free_boundary(m);
  const size_t n = bd.vertices.size();
  std::vector<double> g(n);
  for (size_t i = 0; i < n; ++i) g[i] = 3.0 + std::cos(std::atan2(bd.points[i].y(), bd.points[i].x() - 0.325));

  SECTION("zero gradient gives zero field and multiplier") {
    const auto f = deformation_divfree(s, std::vector<double>(n, 0.0), 1e-2, 1e-4);
    CHECK(f.theta.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(f.pressure.lpNorm<Eigen::Infinity>() == 0.0);
  }
  const auto f = deformation_divfree(s, g, 1e-2, 1e-4);
  CHECK(f.method == Method::DivFree);
  SECTION("discrete divergence vanishes") {
    const double h1 = fem::velocity_norms(s, f.theta).h1;
    REQUIRE(h1 > 0.0);
    CHECK(divergence_residual(s, f.theta) <= 1e-9);
    Vector x = Vector::Zero(s.num_dofs());
    x.head(s.num_velocity_dofs()) = f.theta;
    const Vector dq = fem::assemble_d(s) * x;
    // psi = 1: the sum of all pressure rows
    CHECK(std::abs(dq.tail(s.num_pressure_dofs()).sum()) < 1e-8 * h1);
  }
  SECTION("volume is preserved to second order") {
    const auto disp = vertex_values(s, f.theta);
    const double v0 = mesh::volume(m);
    const double t = 2e-3;
    const double d1 = std::abs(mesh::volume(mesh::move_mesh(m, disp, t)) - v0);
    const double d2 = std::abs(mesh::volume(mesh::move_mesh(m, disp, t / 2)) - v0);
    CHECK(std::log2(d1 / d2) == Approx(2.0).margin(0.2));
  }
  CHECK_THROWS_AS(deformation_divfree(s, g, 1e-2, 0.0), std::invalid_argument);
}

TEST_CASE("directional derivative is linear in the field", "[shape]") {
  const Mesh m = channel(1.0 / 20);
  const TaylorHoodSpace s(m);
  const auto bd = free_boundary(m);
  std::vector<double> g(bd.vertices.size());
  for (size_t i = 0; i < g.size(); ++i) g[i] = std::sin(3.0 * i) + 2.0;
  const auto a = bump_field(m, Vec2(1.0, 0.0));
  const auto b = bump_field(m, Vec2(0.3, -0.7));
  std::vector<Vec2> a2(a.size()), ab(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    a2[i] = 2.0 * a[i];
    ab[i] = a[i] + b[i];
  }
  const double da = directional_derivative(m, g, a), db = directional_derivative(m, g, b);
  CHECK(std::abs(directional_derivative(m, g, a2) - 2.0 * da) <= 1e-10 * std::abs(da));
  CHECK(std::abs(directional_derivative(m, g, ab) - (da + db)) <= 1e-10 * (std::abs(da) + std::abs(db)));
  CHECK(directional_derivative(m, g, std::vector<Vec2>(m.num_vertices(), Vec2::Zero())) == 0.0);
  // constant gradient and a translation: the flux of a constant field through a closed curve is zero
  CHECK(std::abs(directional_derivative(m, std::vector<double>(g.size(), 1.0), a)) < 1e-12);
}

TEST_CASE("boundary norm of a unit field is the perimeter", "[shape]") {
  const Mesh m = channel(1.0 / 30);
  const TaylorHoodSpace s(m);
  const Vector e = fem::interpolate_velocity(s, [](const Vec2&) { return Vec2(0.6, 0.8); });
  CHECK(boundary_norm_squared(s, e) == Approx(mesh::perimeter(m, BoundaryTag::Free)).epsilon(1e-12));
}

TEST_CASE("gradient computations are deterministic", "[shape]") {
  const Mesh m = channel(1.0 / 15);
  const TaylorHoodSpace s(m);
  const auto e1 = extend_normal(s, 1e-3), e2 = extend_normal(s, 1e-3);
  CHECK(std::memcmp(e1.field.data(), e2.field.data(), sizeof(double) * e1.field.size()) == 0);
  CHECK(e1.kappa == e2.kappa);
  const auto f1 = deformation_divfree(s, e1.kappa, 1e-2, 1e-4), f2 = deformation_divfree(s, e1.kappa, 1e-2, 1e-4);
  CHECK(std::memcmp(f1.theta.data(), f2.theta.data(), sizeof(double) * f1.theta.size()) == 0);
}
