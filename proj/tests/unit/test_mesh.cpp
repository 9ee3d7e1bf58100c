#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vortishape/mesh/mesh.hpp"
#include "vortishape/mesh/mesh_io.hpp"

using namespace vortishape::mesh;
using Catch::Approx;

namespace {

Mesh unit_square_two_triangles() {
  std::vector<Vec2> x{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  std::vector<Triangle> t{{0, 1, 2}, {0, 2, 3}};
  std::vector<BoundaryEdge> b{{{0, 1}, BoundaryTag::Wall},
                              {{1, 2}, BoundaryTag::Outflow},
                              {{2, 3}, BoundaryTag::Wall},
                              {{3, 0}, BoundaryTag::Inflow}};
  return Mesh(x, t, b, 1.0);
}

// Closed-form shoelace area of a polygon, independent of polygon_area.
double shoelace(const std::vector<Vec2>& p) {
  double s = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    const Vec2& a = p[i];
    const Vec2& b = p[(i + 1) % p.size()];
    s += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * s;
}

}  // namespace

TEST_CASE("equilateral triangle quality") {
  std::vector<Vec2> x{{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}};
  std::vector<BoundaryEdge> b{{{0, 1}, BoundaryTag::Wall}, {{1, 2}, BoundaryTag::Wall}, {{2, 0}, BoundaryTag::Wall}};
  Mesh m(x, {{0, 1, 2}}, b, 1.0);
  auto q = check_mesh(m);
  CHECK(q.min_angle_deg == Approx(60.0));
  CHECK(q.inverted_count == 0);
}

TEST_CASE("clockwise input triangles are reoriented") {
  std::vector<Vec2> x{{0, 0}, {1, 0}, {0, 1}};
  std::vector<BoundaryEdge> b{{{0, 1}, BoundaryTag::Wall}, {{1, 2}, BoundaryTag::Wall}, {{2, 0}, BoundaryTag::Wall}};
  Mesh m(x, {{0, 2, 1}}, b, 1.0);
  CHECK(m.signed_area(0) > 0.0);
}

TEST_CASE("unit square volume and perimeters") {
  Mesh m = unit_square_two_triangles();
  CHECK(volume(m) == Approx(1.0));
  CHECK(perimeter(m, BoundaryTag::Outflow) == Approx(1.0));
  CHECK(perimeter(m, BoundaryTag::Inflow) == Approx(1.0));
  CHECK_THROWS(perimeter(m, BoundaryTag::Free));
  CHECK(m.num_edges() == 5);
}

TEST_CASE("boundary normals point out of the fluid") {
  Mesh m = unit_square_two_triangles();
  for (int b = 0; b < static_cast<int>(m.boundary_edges().size()); ++b) {
    const auto& e = m.boundary_edges()[b];
    const Vec2 mid = 0.5 * (m.vertices()[e.v[0]] + m.vertices()[e.v[1]]);
    const Vec2 probe = mid + 1e-3 * m.edge_normal(b);
    const bool inside = probe.x() > 0 && probe.x() < 1 && probe.y() > 0 && probe.y() < 1;
    CHECK_FALSE(inside);
  }
}

TEST_CASE("channel mesh geometry") {
  const Rect rect;
  Mesh m = generate_channel_mesh(rect, Vec2(0.325, 0.0), 0.13, 1.0 / 30);
  auto q = check_mesh(m);
  CHECK(q.inverted_count == 0);
  CHECK(q.min_angle_deg >= 20.0);
  CHECK(perimeter(m, BoundaryTag::Outflow) == Approx(1.0));
  CHECK(perimeter(m, BoundaryTag::Inflow) == Approx(1.0));
  CHECK(perimeter(m, BoundaryTag::Wall) == Approx(4.0));
  const int segs = static_cast<int>(std::ceil(2 * M_PI * 0.13 * 30));
  CHECK(static_cast<int>(m.boundary_loop(BoundaryTag::Free).size()) == segs);
  // inscribed polygon area
  const double hole = 0.5 * segs * 0.13 * 0.13 * std::sin(2 * M_PI / segs);
  CHECK(volume(m) == Approx(2.0 - hole).epsilon(1e-12));
}

TEST_CASE("reference channel volume") {
  Mesh m = generate_channel_mesh(Rect{}, Vec2(0.325, 0.0), 0.13, 1.0 / 60);
  CHECK(std::abs(volume(m) - 1.94699) < 2e-3);
  CHECK(std::abs(perimeter(m, BoundaryTag::Free) - 2 * M_PI * 0.13) < 1e-3);
}

TEST_CASE("channel mesh preconditions") {
  CHECK_THROWS_AS(generate_channel_mesh(Rect{}, Vec2(0.325, 0.0), 0.5, 1.0 / 30), std::invalid_argument);
  CHECK_THROWS_AS(generate_channel_mesh(Rect{}, Vec2(0.325, 0.0), 0.0, 1.0 / 30), std::invalid_argument);
  CHECK_THROWS_AS(generate_channel_mesh(Rect{Vec2(0, 0), Vec2(0, 1)}, Vec2(0.5, 0.5), 0.1, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(generate_channel_mesh(Rect{}, Vec2(0.325, 0.0), 0.13, 0.0), std::invalid_argument);
}

TEST_CASE("move mesh round trip and identity") {
  Mesh m = generate_channel_mesh(Rect{}, Vec2(0.325, 0.0), 0.13, 0.1);
  std::vector<Vec2> theta(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) {
    const Vec2& x = m.vertices()[v];
    theta[v] = m.is_boundary_vertex(v) && std::abs(x.y()) > 0.49 ? Vec2::Zero() : Vec2(std::sin(x.y()), x.x() * x.y());
  }
  Mesh same = move_mesh(m, theta, 0.0);
  CHECK(same.vertices() == m.vertices());
  Mesh back = move_mesh(move_mesh(m, theta, 0.01), theta, -0.01);
  for (int v = 0; v < m.num_vertices(); ++v) CHECK((back.vertices()[v] - m.vertices()[v]).norm() < 1e-15);
  CHECK(back.triangles() == m.triangles());
}

TEST_CASE("move mesh volume change matches boundary flux") {
  Mesh m = generate_channel_mesh(Rect{}, Vec2(0.325, 0.0), 0.13, 0.05);
  const Vec2 c(0.325, 0.0);
  // theta = -n on the obstacle: radial outward from the centre, decaying away from it
  std::vector<Vec2> theta(m.num_vertices(), Vec2::Zero());
  for (int v = 0; v < m.num_vertices(); ++v) {
    const Vec2 d = m.vertices()[v] - c;
    const double r = d.norm();
    if (r < 0.3) theta[v] = d / r * std::max(0.0, 1.0 - (r - 0.13) / 0.17);
  }
  // flux of the piecewise linear trace through the obstacle edges
  double flux = 0.0;
  for (int b : m.boundary_loop_edges(BoundaryTag::Free)) {
    const auto& e = m.boundary_edges()[b];
    flux += m.edge_length(b) * 0.5 * (theta[e.v[0]] + theta[e.v[1]]).dot(m.edge_normal(b));
  }
  CHECK(flux == Approx(-perimeter(m, BoundaryTag::Free)).epsilon(0.03));
  auto err = [&](double t) {
    Mesh moved = move_mesh(m, theta, t);
    auto poly = boundary_polyline(moved, BoundaryTag::Free);
    const double hole = std::abs(shoelace(poly));
    CHECK(volume(moved) == Approx(2.0 - hole).epsilon(1e-12));
    return std::abs(volume(moved) - (volume(m) + t * flux));
  };
  const double e1 = err(0.004), e2 = err(0.002);
  CHECK(e2 < 0.3 * e1);
}

TEST_CASE("move mesh can invert") {
  Mesh m = generate_channel_mesh(Rect{}, Vec2(0.325, 0.0), 0.13, 0.1);
  std::vector<Vec2> theta(m.num_vertices(), Vec2::Zero());
  for (int v = 0; v < m.num_vertices(); ++v)
    if (!m.is_boundary_vertex(v)) {
      theta[v] = Vec2(1.0, 0.0);
      break;
    }
  Mesh moved = move_mesh(m, theta, 5.0);
  CHECK(check_mesh(moved).inverted_count >= 1);
}

TEST_CASE("smoothing pulls a perturbed vertex back") {
  // structured 4x4 grid
  std::vector<Vec2> x;
  const int n = 4;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) x.emplace_back(double(i) / n, double(j) / n);
  std::vector<Triangle> t;
  auto id = [&](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      t.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      t.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  std::vector<BoundaryEdge> b;
  for (int i = 0; i < n; ++i) {
    b.push_back({{id(i, 0), id(i + 1, 0)}, BoundaryTag::Wall});
    b.push_back({{id(n, i), id(n, i + 1)}, BoundaryTag::Outflow});
    b.push_back({{id(i + 1, n), id(i, n)}, BoundaryTag::Wall});
    b.push_back({{id(0, i + 1), id(0, i)}, BoundaryTag::Inflow});
  }
  Mesh grid(x, t, b, 0.25);
  Mesh fixed = smooth_mesh(grid);
  for (int v = 0; v < grid.num_vertices(); ++v) CHECK((fixed.vertices()[v] - grid.vertices()[v]).norm() < 1e-12);

  auto pert = x;
  pert[id(2, 2)] += Vec2(0.08, 0.05);
  Mesh bumped(pert, t, b, 0.25);
  Mesh smoothed = smooth_mesh(bumped);
  const double before = (bumped.vertices()[id(2, 2)] - Vec2(0.5, 0.5)).norm();
  const double after = (smoothed.vertices()[id(2, 2)] - Vec2(0.5, 0.5)).norm();
  CHECK(after < before);
  CHECK(check_mesh(smoothed).min_angle_deg >= check_mesh(bumped).min_angle_deg);
  for (int v = 0; v < grid.num_vertices(); ++v)
    if (grid.is_boundary_vertex(v)) CHECK(smoothed.vertices()[v] == bumped.vertices()[v]);
}

TEST_CASE("smoothing after a move does not lower the minimum angle") {
  Mesh m = generate_channel_mesh(Rect{}, Vec2(0.325, 0.0), 0.13, 1.0 / 20);
  const Vec2 c(0.325, 0.0);
  std::vector<Vec2> theta(m.num_vertices(), Vec2::Zero());
  for (int v = 0; v < m.num_vertices(); ++v) {
    const Vec2 d = m.vertices()[v] - c;
    if (d.norm() < 0.3) theta[v] = Vec2(d.y() > 0 ? 1.0 : -1.0, 0.0) * (0.3 - d.norm());
  }
  Mesh moved = move_mesh(m, theta, 0.2);
  REQUIRE(check_mesh(moved).inverted_count == 0);
  CHECK(check_mesh(smooth_mesh(moved)).min_angle_deg >= check_mesh(moved).min_angle_deg);
}

TEST_CASE("perimeter and volume are translation invariant") {
  Mesh m = generate_channel_mesh(Rect{}, Vec2(0.325, 0.0), 0.13, 0.1);
  std::vector<Vec2> shift(m.num_vertices(), Vec2(0.37, -1.2));
  Mesh moved = move_mesh(m, shift, 1.0);
  CHECK(volume(moved) == Approx(volume(m)).epsilon(1e-12));
  CHECK(perimeter(moved, BoundaryTag::Free) == Approx(perimeter(m, BoundaryTag::Free)).epsilon(1e-12));
}

TEST_CASE("hausdorff distance") {
  const auto a = circle_polygon(Vec2(0, 0), 0.13, 1e-3);
  const auto b = circle_polygon(Vec2(0, 0), 0.15, 1e-3);
  CHECK(hausdorff_distance(a, a) == 0.0);
  CHECK(hausdorff_distance(a, b) == Approx(0.02).margin(1e-4));
  std::vector<Vec2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  auto shifted = sq;
  for (auto& p : shifted) p.x() += 0.1;
  CHECK(hausdorff_distance(sq, shifted) == Approx(0.1));
  CHECK_THROWS(hausdorff_distance({}, sq));
}

TEST_CASE("hausdorff metric axioms") {
  const auto a = circle_polygon(Vec2(0, 0), 0.13, 0.01);
  const auto b = circle_polygon(Vec2(0.02, 0.01), 0.14, 0.013);
  std::vector<Vec2> c;
  for (int i = 0; i < 40; ++i) {
    const double s = 2 * M_PI * i / 40;
    c.emplace_back(0.16 * std::cos(s), 0.11 * std::sin(s));
  }
  const double ab = hausdorff_distance(a, b), ba = hausdorff_distance(b, a);
  CHECK(ab == ba);
  CHECK(ab > 0.0);
  CHECK(hausdorff_distance(a, c) <= ab + hausdorff_distance(b, c) + 1e-15);
  CHECK(hausdorff_distance(b, c) <= ab + hausdorff_distance(a, c) + 1e-15);
}

TEST_CASE("mesh file round trip") {
  Mesh m = generate_channel_mesh(Rect{}, Vec2(0.325, 0.0), 0.13, 0.1);
  std::stringstream ss;
  write_mesh(ss, m);
  std::string header;
  std::getline(ss, header);
  std::istringstream hs(header);
  int nv, nt, nbe;
  hs >> nv >> nt >> nbe;
  CHECK(nv == m.num_vertices());
  CHECK(nt == m.num_triangles());
  CHECK(nbe == static_cast<int>(m.boundary_edges().size()));
  ss.seekg(0);
  Mesh r = read_mesh(ss, 0.1);
  CHECK(r.vertices() == m.vertices());
  CHECK(r.triangles() == m.triangles());
  CHECK(volume(r) == volume(m));
  CHECK(perimeter(r, BoundaryTag::Free) == perimeter(m, BoundaryTag::Free));
}

TEST_CASE("gmsh import") {
  std::istringstream in(R"($MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
4
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
$EndNodes
$Elements
6
1 1 2 11 1 1 2
2 1 2 12 2 2 3
3 1 2 11 3 3 4
4 1 2 13 4 4 1
5 2 2 100 1 1 2 3
6 2 2 100 1 1 3 4
$EndElements
)");
  GmshTagTable tags{{11, BoundaryTag::Wall}, {12, BoundaryTag::Outflow}, {13, BoundaryTag::Inflow}};
  Mesh m = read_gmsh(in, tags);
  CHECK(m.num_vertices() == 4);
  CHECK(m.num_triangles() == 2);
  CHECK(volume(m) == Approx(1.0));
  CHECK(perimeter(m, BoundaryTag::Outflow) == Approx(1.0));
  CHECK(m.h_target() == Approx(1.0));
}

TEST_CASE("polyline csv round trip") {
  const auto p = circle_polygon(Vec2(0.3, 0.1), 0.2, 0.05);
  const auto path = std::filesystem::temp_directory_path() / "vortishape_poly_test.csv";
  write_polyline_csv(path.string(), p);
  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  CHECK(header == "x,y");
  const auto r = read_polyline_csv(path.string());
  REQUIRE(r.size() == p.size());
  for (size_t i = 0; i < p.size(); ++i) CHECK((r[i] - p[i]).norm() < 1e-14);
  std::filesystem::remove(path);
}
