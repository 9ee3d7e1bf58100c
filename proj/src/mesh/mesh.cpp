#include "vortishape/mesh/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace vortishape::mesh {

namespace {

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (hi << 32) | lo;
}

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double tri_signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * cross(b - a, c - a);
}

// Smallest interior angle in degrees, or -1 if the triangle is not positively oriented.
double tri_min_angle(const Vec2& a, const Vec2& b, const Vec2& c) {
  if (tri_signed_area(a, b, c) <= 0.0) return -1.0;
  const Vec2* p[3] = {&a, &b, &c};
  double best = 180.0;
  for (int k = 0; k < 3; ++k) {
    const Vec2 e1 = *p[(k + 1) % 3] - *p[k];
    const Vec2 e2 = *p[(k + 2) % 3] - *p[k];
    const double ang = std::atan2(std::abs(cross(e1, e2)), e1.dot(e2));
    best = std::min(best, ang * 180.0 / M_PI);
  }
  return best;
}

}  // namespace

std::string_view to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Inflow: return "inflow";
    case BoundaryTag::Wall: return "wall";
    case BoundaryTag::Outflow: return "outflow";
    case BoundaryTag::Free: return "free";
  }
  return "unknown";
}

BoundaryTag tag_from_int(int value) {
  if (value < 1 || value > 4) throw std::invalid_argument("unknown boundary tag " + std::to_string(value));
  return static_cast<BoundaryTag>(value);
}

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<Triangle> triangles,
           std::vector<BoundaryEdge> boundary_edges, double h_target)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      boundary_(std::move(boundary_edges)),
      h_target_(h_target) {
  const int nv = num_vertices();
  if (triangles_.empty()) throw std::invalid_argument("mesh has no triangles");
  for (auto& t : triangles_) {
    for (int v : t)
      if (v < 0 || v >= nv) throw std::invalid_argument("triangle references missing vertex");
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      throw std::invalid_argument("triangle with repeated vertex");
    const double a = tri_signed_area(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
    if (a == 0.0) throw std::invalid_argument("degenerate triangle");
    if (a < 0.0) std::swap(t[1], t[2]);
  }
  for (const auto& b : boundary_)
    for (int v : b.v)
      if (v < 0 || v >= nv) throw std::invalid_argument("boundary edge references missing vertex");
  build_topology();
}

void Mesh::build_topology() {
  const int nt = num_triangles();
  std::unordered_map<std::uint64_t, int> index;
  index.reserve(static_cast<size_t>(nt) * 2);
  edges_.clear();
  tri_edges_.assign(nt, {-1, -1, -1});
  std::vector<int> count;
  std::vector<int> first_tri;
  std::vector<int> first_local;
  for (int t = 0; t < nt; ++t) {
    for (int k = 0; k < 3; ++k) {
      const int a = triangles_[t][k];
      const int b = triangles_[t][(k + 1) % 3];
      auto [it, inserted] = index.try_emplace(edge_key(a, b), num_edges());
      if (inserted) {
        edges_.push_back({std::min(a, b), std::max(a, b)});
        count.push_back(0);
        first_tri.push_back(t);
        first_local.push_back(k);
      }
      tri_edges_[t][k] = it->second;
      if (++count[it->second] > 2) throw std::invalid_argument("non-manifold edge in mesh");
    }
  }

  int n_open = 0;
  for (int c : count) n_open += (c == 1);
  if (n_open != static_cast<int>(boundary_.size()))
    throw std::invalid_argument("tagged boundary edges do not match the mesh boundary (" +
                                std::to_string(boundary_.size()) + " tagged, " +
                                std::to_string(n_open) + " open)");

  const int nb = static_cast<int>(boundary_.size());
  boundary_tri_.assign(nb, -1);
  boundary_local_.assign(nb, -1);
  boundary_mesh_edge_.assign(nb, -1);
  boundary_vertex_.assign(vertices_.size(), 0);
  std::vector<char> seen(edges_.size(), 0);
  for (int b = 0; b < nb; ++b) {
    auto& be = boundary_[b];
    auto it = index.find(edge_key(be.v[0], be.v[1]));
    if (it == index.end() || count[it->second] != 1)
      throw std::invalid_argument("tagged edge is not on the mesh boundary");
    const int e = it->second;
    if (seen[e]) throw std::invalid_argument("boundary edge tagged twice");
    seen[e] = 1;
    const int t = first_tri[e];
    const int k = first_local[e];
    be.v = {triangles_[t][k], triangles_[t][(k + 1) % 3]};
    boundary_tri_[b] = t;
    boundary_local_[b] = k;
    boundary_mesh_edge_[b] = e;
    boundary_vertex_[be.v[0]] = 1;
    boundary_vertex_[be.v[1]] = 1;
  }
}

bool Mesh::has_tag(BoundaryTag tag) const {
  return std::any_of(boundary_.begin(), boundary_.end(),
                     [tag](const BoundaryEdge& b) { return b.tag == tag; });
}

Vec2 Mesh::edge_normal(int b) const {
  const Vec2 d = vertices_[boundary_[b].v[1]] - vertices_[boundary_[b].v[0]];
  return Vec2(d.y(), -d.x()).normalized();
}

double Mesh::edge_length(int b) const {
  return (vertices_[boundary_[b].v[1]] - vertices_[boundary_[b].v[0]]).norm();
}

std::vector<int> Mesh::boundary_loop_edges(BoundaryTag tag) const {
  std::unordered_map<int, int> from;
  int start = -1;
  int n = 0;
  for (int b = 0; b < static_cast<int>(boundary_.size()); ++b) {
    if (boundary_[b].tag != tag) continue;
    if (!from.emplace(boundary_[b].v[0], b).second)
      throw std::runtime_error("boundary of tag " + std::string(to_string(tag)) + " branches");
    if (start < 0) start = b;
    ++n;
  }
  if (start < 0) throw std::runtime_error("no boundary edges with tag " + std::string(to_string(tag)));
  std::vector<int> loop;
  loop.reserve(n);
  int b = start;
  do {
    loop.push_back(b);
    auto it = from.find(boundary_[b].v[1]);
    if (it == from.end())
      throw std::runtime_error("boundary of tag " + std::string(to_string(tag)) + " is not closed");
    b = it->second;
  } while (b != start && static_cast<int>(loop.size()) <= n);
  if (static_cast<int>(loop.size()) != n)
    throw std::runtime_error("boundary of tag " + std::string(to_string(tag)) + " is not a single loop");
  return loop;
}

std::vector<int> Mesh::boundary_loop(BoundaryTag tag) const {
  std::vector<int> verts;
  for (int b : boundary_loop_edges(tag)) verts.push_back(boundary_[b].v[0]);
  return verts;
}

Mesh Mesh::with_vertices(std::vector<Vec2> vertices) const {
  if (vertices.size() != vertices_.size())
    throw std::invalid_argument("vertex count mismatch");
  Mesh m = *this;
  m.vertices_ = std::move(vertices);
  return m;
}

double Mesh::signed_area(int t) const {
  const auto& tr = triangles_[t];
  return tri_signed_area(vertices_[tr[0]], vertices_[tr[1]], vertices_[tr[2]]);
}

MeshQuality check_mesh(const Mesh& mesh) {
  MeshQuality q;
  q.min_angle_deg = 180.0;
  q.min_area = std::numeric_limits<double>::infinity();
  const auto& x = mesh.vertices();
  for (const auto& t : mesh.triangles()) {
    const double a = tri_signed_area(x[t[0]], x[t[1]], x[t[2]]);
    q.min_area = std::min(q.min_area, a);
    if (a <= 0.0) {
      ++q.inverted_count;
      q.min_angle_deg = 0.0;
      continue;
    }
    q.min_angle_deg = std::min(q.min_angle_deg, tri_min_angle(x[t[0]], x[t[1]], x[t[2]]));
  }
  return q;
}

Mesh move_mesh(const Mesh& mesh, const std::vector<Vec2>& displacement, double t) {
  if (static_cast<int>(displacement.size()) != mesh.num_vertices())
    throw std::invalid_argument("displacement length does not match vertex count");
  std::vector<Vec2> x = mesh.vertices();
  for (size_t i = 0; i < x.size(); ++i) x[i] += t * displacement[i];
  return mesh.with_vertices(std::move(x));
}

Mesh smooth_mesh(const Mesh& mesh, int sweeps) {
  const int nv = mesh.num_vertices();
  std::vector<std::vector<int>> nbr(nv);
  for (const auto& e : mesh.edges()) {
    nbr[e[0]].push_back(e[1]);
    nbr[e[1]].push_back(e[0]);
  }
  std::vector<std::vector<int>> incident(nv);
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int v : mesh.triangles()[t]) incident[v].push_back(t);

  std::vector<Vec2> x = mesh.vertices();
  const auto& tris = mesh.triangles();
  auto local_quality = [&](int v) {
    double q = 180.0;
    for (int t : incident[v]) {
      const auto& tr = tris[t];
      q = std::min(q, tri_min_angle(x[tr[0]], x[tr[1]], x[tr[2]]));
    }
    return q;
  };

  for (int s = 0; s < sweeps; ++s) {
    for (int v = 0; v < nv; ++v) {
      if (mesh.is_boundary_vertex(v) || nbr[v].empty()) continue;
      Vec2 avg = Vec2::Zero();
      for (int w : nbr[v]) avg += x[w];
      avg /= static_cast<double>(nbr[v].size());
      const double before = local_quality(v);
      const Vec2 old = x[v];
      x[v] = avg;
      if (local_quality(v) < before) x[v] = old;
    }
  }
  return mesh.with_vertices(std::move(x));
}

double volume(const Mesh& mesh) {
  double a = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) a += mesh.signed_area(t);
  return a;
}

double perimeter(const Mesh& mesh, BoundaryTag tag) {
  if (!mesh.has_tag(tag)) throw std::invalid_argument("no boundary edges tagged " + std::string(to_string(tag)));
  double p = 0.0;
  for (int b = 0; b < static_cast<int>(mesh.boundary_edges().size()); ++b)
    if (mesh.boundary_edges()[b].tag == tag) p += mesh.edge_length(b);
  return p;
}

std::vector<Vec2> boundary_polyline(const Mesh& mesh, BoundaryTag tag) {
  std::vector<Vec2> pts;
  for (int v : mesh.boundary_loop(tag)) pts.push_back(mesh.vertices()[v]);
  return pts;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double s = std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
  return (p - (a + s * d)).norm();
}

namespace {
double directed_hausdorff(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  double worst = 0.0;
  const size_t n = b.size();
  for (const auto& p : a) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < n; ++i) best = std::min(best, point_segment_distance(p, b[i], b[(i + 1) % n]));
    worst = std::max(worst, best);
  }
  return worst;
}
}  // namespace

double hausdorff_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("polyline needs at least two points");
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

double polygon_area(const std::vector<Vec2>& poly) {
  double s = 0.0;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) s += cross(poly[i], poly[(i + 1) % n]);
  return std::abs(0.5 * s);
}

bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly) {
  bool inside = false;
  const size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double xc = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < xc) inside = !inside;
    }
  }
  return inside;
}

}  // namespace vortishape::mesh
