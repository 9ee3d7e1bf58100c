#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "vortishape/mesh/mesh.hpp"

namespace vortishape::fem {

using mesh::BoundaryTag;
using mesh::Vec2;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Square sparse matrix with a right-hand side.
struct SparseSystem {
  SparseMatrix matrix;
  Vector rhs;
};

/// P2 vector velocity and P1 pressure over a mesh.
///
/// Scalar P2 node numbering: vertex v -> v, edge e -> nv + e. The unknown
/// vector is [u_x (n2), u_y (n2), p (nv)] with n2 = nv + nedges.
class TaylorHoodSpace {
 public:
  explicit TaylorHoodSpace(std::shared_ptr<const mesh::Mesh> mesh);
  explicit TaylorHoodSpace(const mesh::Mesh& mesh);

  const mesh::Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const mesh::Mesh> mesh_ptr() const { return mesh_; }

  int num_vertices() const { return nv_; }
  int num_edges() const { return ne_; }
  int num_p2_nodes() const { return nv_ + ne_; }
  int num_velocity_dofs() const { return 2 * (nv_ + ne_); }
  int num_pressure_dofs() const { return nv_; }
  int num_dofs() const { return num_velocity_dofs() + nv_; }

  int velocity_dof(int component, int node) const { return component * (nv_ + ne_) + node; }
  int pressure_dof(int vertex) const { return num_velocity_dofs() + vertex; }

  /// Local P2 nodes of a triangle: its three vertices, then the midpoints of
  /// local edges (v0,v1), (v1,v2), (v2,v0).
  std::array<int, 6> p2_nodes(int tri) const;
  const std::vector<Vec2>& node_coords() const { return coords_; }
  /// Location of every unknown in the [u_x, u_y, p] layout.
  std::vector<Vec2> dof_coords() const;

  /// P2 nodes lying on boundary edges with one of the given tags.
  std::vector<int> boundary_nodes(const std::vector<BoundaryTag>& tags) const;
  /// The three P2 nodes of boundary edge b: start vertex, end vertex, midpoint.
  std::array<int, 3> boundary_edge_nodes(int b) const;

 private:
  std::shared_ptr<const mesh::Mesh> mesh_;
  int nv_ = 0;
  int ne_ = 0;
  std::vector<Vec2> coords_;
};

/// Affine element data.
struct Element {
  std::array<int, 6> nodes;
  std::array<Vec2, 3> x;
  std::array<Vec2, 3> grad_lambda;
  double area = 0.0;  // signed

  Vec2 point(const std::array<double, 3>& l) const { return l[0] * x[0] + l[1] * x[1] + l[2] * x[2]; }
};

Element element(const TaylorHoodSpace& space, int tri);

/// P2 basis values in barycentric coordinates, ordered like p2_nodes.
std::array<double, 6> p2_values(const std::array<double, 3>& l);
std::array<Vec2, 6> p2_gradients(const std::array<double, 3>& l, const std::array<Vec2, 3>& grad_lambda);

/// Local barycentric index of the P2 nodes on local edge k: (k, k+1, 3+k).
std::array<int, 3> local_edge_nodes(int k);
/// Barycentric coordinates of the point at parameter s along local edge k.
std::array<double, 3> edge_barycentric(int k, double s);

/// CSR sparsity of a block system over P2 nodes. `components` velocity-like
/// blocks are coupled with each other; with_pressure adds P1 coupling rows
/// and columns (no pressure-pressure block).
class SystemPattern {
 public:
  SystemPattern(const TaylorHoodSpace& space, int components, bool with_pressure);

  int size() const { return n_; }
  SparseMatrix zero_matrix() const;

 private:
  int n_ = 0;
  std::vector<int> outer_;
  std::vector<int> inner_;
};

/// Scatters element matrices into a fixed-pattern CSR matrix.
class MatrixAssembler {
 public:
  explicit MatrixAssembler(SparseMatrix& m) : m_(m) {}
  void add(int row, int col, double value);
  template <int R, int C>
  void add_block(const std::array<int, R>& rows, const std::array<int, C>& cols, const double (&local)[R][C]) {
    for (int i = 0; i < R; ++i)
      for (int j = 0; j < C; ++j)
        if (local[i][j] != 0.0) add(rows[i], cols[j], local[i][j]);
  }

 private:
  SparseMatrix& m_;
};

}  // namespace vortishape::fem
