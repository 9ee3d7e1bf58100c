#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace vortishape::mesh {

using Vec2 = Eigen::Vector2d;
using Triangle = std::array<int, 3>;

enum class BoundaryTag : int { Inflow = 1, Wall = 2, Outflow = 3, Free = 4 };

std::string_view to_string(BoundaryTag tag);
BoundaryTag tag_from_int(int value);

/// A boundary edge. After construction of a Mesh the vertex pair is
/// oriented so that the fluid lies on its left.
struct BoundaryEdge {
  std::array<int, 2> v;
  BoundaryTag tag;
};

struct MeshQuality {
  double min_angle_deg = 0.0;
  double min_area = 0.0;
  int inverted_count = 0;
};

/// Conforming triangulation with tagged boundary edges.
///
/// Triangles are stored counter-clockwise. Edges are numbered in order of
/// first appearance when walking the triangles; local edge k of a triangle
/// joins its vertices k and (k+1)%3.
class Mesh {
 public:
  Mesh() = default;
  Mesh(std::vector<Vec2> vertices, std::vector<Triangle> triangles,
       std::vector<BoundaryEdge> boundary_edges, double h_target);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }
  double h_target() const { return h_target_; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const std::vector<std::array<int, 2>>& edges() const { return edges_; }
  const std::vector<std::array<int, 3>>& triangle_edges() const { return tri_edges_; }

  /// Triangle adjacent to boundary edge b and the local edge index in it.
  int boundary_triangle(int b) const { return boundary_tri_[b]; }
  int boundary_local_edge(int b) const { return boundary_local_[b]; }
  int boundary_mesh_edge(int b) const { return boundary_mesh_edge_[b]; }

  bool is_boundary_vertex(int v) const { return boundary_vertex_[v] != 0; }
  bool has_tag(BoundaryTag tag) const;

  /// Unit normal pointing out of the fluid.
  Vec2 edge_normal(int b) const;
  double edge_length(int b) const;

  /// Ordered vertex loop of a closed boundary component carrying `tag`.
  /// Follows edge orientation. Throws if the tagged edges do not form a
  /// single closed loop.
  std::vector<int> boundary_loop(BoundaryTag tag) const;

  /// Boundary edge indices of `tag`, ordered along the loop.
  std::vector<int> boundary_loop_edges(BoundaryTag tag) const;

  /// Same topology, new coordinates.
  Mesh with_vertices(std::vector<Vec2> vertices) const;

  double signed_area(int t) const;

 private:
  void build_topology();

  std::vector<Vec2> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<BoundaryEdge> boundary_;
  double h_target_ = 0.0;

  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::vector<int> boundary_tri_;
  std::vector<int> boundary_local_;
  std::vector<int> boundary_mesh_edge_;
  std::vector<std::uint8_t> boundary_vertex_;
};

struct Rect {
  Vec2 lo{0.0, -0.5};
  Vec2 hi{2.0, 0.5};
};

/// Closed polygon approximating a circle, counter-clockwise, with
/// max(16, ceil(2*pi*r/h)) segments.
std::vector<Vec2> circle_polygon(const Vec2& center, double radius, double h);

/// Channel around one obstacle. Left side is inflow, right side outflow,
/// top and bottom walls, obstacle boundary free. Throws std::invalid_argument
/// if the obstacle is not strictly inside the rectangle with clearance h.
Mesh generate_channel_mesh(const Rect& rect, const Vec2& center, double radius, double h);
Mesh generate_channel_mesh(const Rect& rect, const std::vector<Vec2>& obstacle, double h);

/// Rectangle without obstacle, tagged like the channel.
Mesh generate_rectangle_mesh(const Rect& rect, double h);

MeshQuality check_mesh(const Mesh& mesh);

/// Displaces every vertex by t * displacement[v]. Connectivity unchanged.
Mesh move_mesh(const Mesh& mesh, const std::vector<Vec2>& displacement, double t);

/// Laplacian sweeps on interior vertices. A move is kept only if it does not
/// lower the minimum angle of the incident triangles or invert one.
Mesh smooth_mesh(const Mesh& mesh, int sweeps = 5);

double volume(const Mesh& mesh);
double perimeter(const Mesh& mesh, BoundaryTag tag);

/// Coordinates of the ordered loop of `tag`.
std::vector<Vec2> boundary_polyline(const Mesh& mesh, BoundaryTag tag);

/// Symmetric Hausdorff distance between closed polylines, measured from the
/// vertices of each to the segments of the other.
double hausdorff_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b);

/// Area enclosed by a closed polygon (absolute value).
double polygon_area(const std::vector<Vec2>& poly);
bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly);
double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

}  // namespace vortishape::mesh
