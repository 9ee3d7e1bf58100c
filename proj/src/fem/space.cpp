#include "vortishape/fem/space.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace vortishape::fem {

TaylorHoodSpace::TaylorHoodSpace(std::shared_ptr<const mesh::Mesh> mesh) : mesh_(std::move(mesh)) {
  if (!mesh_) throw std::invalid_argument("null mesh");
  nv_ = mesh_->num_vertices();
  ne_ = mesh_->num_edges();
  coords_ = mesh_->vertices();
  coords_.reserve(nv_ + ne_);
  for (const auto& e : mesh_->edges()) coords_.push_back(0.5 * (mesh_->vertices()[e[0]] + mesh_->vertices()[e[1]]));
}

TaylorHoodSpace::TaylorHoodSpace(const mesh::Mesh& mesh)
    : TaylorHoodSpace(std::make_shared<const mesh::Mesh>(mesh)) {}

std::array<int, 6> TaylorHoodSpace::p2_nodes(int tri) const {
  const auto& t = mesh_->triangles()[tri];
  const auto& e = mesh_->triangle_edges()[tri];
  return {t[0], t[1], t[2], nv_ + e[0], nv_ + e[1], nv_ + e[2]};
}

std::array<int, 3> TaylorHoodSpace::boundary_edge_nodes(int b) const {
  const auto& be = mesh_->boundary_edges()[b];
  return {be.v[0], be.v[1], nv_ + mesh_->boundary_mesh_edge(b)};
}

std::vector<int> TaylorHoodSpace::boundary_nodes(const std::vector<BoundaryTag>& tags) const {
  std::vector<char> on(nv_ + ne_, 0);
  const auto& be = mesh_->boundary_edges();
  for (int b = 0; b < static_cast<int>(be.size()); ++b) {
    if (std::find(tags.begin(), tags.end(), be[b].tag) == tags.end()) continue;
    for (int n : boundary_edge_nodes(b)) on[n] = 1;
  }
  std::vector<int> out;
  for (int n = 0; n < nv_ + ne_; ++n)
    if (on[n]) out.push_back(n);
  return out;
}

Element element(const TaylorHoodSpace& space, int tri) {
  Element el;
  el.nodes = space.p2_nodes(tri);
  const auto& t = space.mesh().triangles()[tri];
  for (int k = 0; k < 3; ++k) el.x[k] = space.mesh().vertices()[t[k]];
  const Vec2 e1 = el.x[1] - el.x[0];
  const Vec2 e2 = el.x[2] - el.x[0];
  const double det = e1.x() * e2.y() - e1.y() * e2.x();
  if (det == 0.0) throw std::runtime_error("degenerate triangle " + std::to_string(tri));
  el.area = 0.5 * det;
  // grad(lambda_1), grad(lambda_2) are the rows of J^{-1}.
  el.grad_lambda[1] = Vec2(e2.y(), -e2.x()) / det;
  el.grad_lambda[2] = Vec2(-e1.y(), e1.x()) / det;
  el.grad_lambda[0] = -el.grad_lambda[1] - el.grad_lambda[2];
  return el;
}

std::array<double, 6> p2_values(const std::array<double, 3>& l) {
  return {l[0] * (2.0 * l[0] - 1.0), l[1] * (2.0 * l[1] - 1.0), l[2] * (2.0 * l[2] - 1.0),
          4.0 * l[0] * l[1],         4.0 * l[1] * l[2],         4.0 * l[2] * l[0]};
}

std::array<Vec2, 6> p2_gradients(const std::array<double, 3>& l, const std::array<Vec2, 3>& g) {
  return {(4.0 * l[0] - 1.0) * g[0],        (4.0 * l[1] - 1.0) * g[1],        (4.0 * l[2] - 1.0) * g[2],
          4.0 * (l[1] * g[0] + l[0] * g[1]), 4.0 * (l[2] * g[1] + l[1] * g[2]), 4.0 * (l[0] * g[2] + l[2] * g[0])};
}

std::array<int, 3> local_edge_nodes(int k) { return {k, (k + 1) % 3, 3 + k}; }

std::array<double, 3> edge_barycentric(int k, double s) {
  std::array<double, 3> l{0.0, 0.0, 0.0};
  l[k] = 1.0 - s;
  l[(k + 1) % 3] = s;
  return l;
}

SystemPattern::SystemPattern(const TaylorHoodSpace& space, int components, bool with_pressure) {
  if (components < 1) throw std::invalid_argument("pattern needs at least one component");
  const int n2 = space.num_p2_nodes();
  const int nv = space.num_vertices();
  std::vector<std::vector<int>> nbr(n2);
  for (int t = 0; t < space.mesh().num_triangles(); ++t) {
    const auto nodes = space.p2_nodes(t);
    for (int a : nodes)
      for (int b : nodes) nbr[a].push_back(b);
  }
  for (auto& v : nbr) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  const int nvel = components * n2;
  n_ = nvel + (with_pressure ? nv : 0);
  outer_.assign(n_ + 1, 0);
  inner_.clear();
  auto velocity_cols = [&](int a) {
    for (int d = 0; d < components; ++d)
      for (int b : nbr[a]) inner_.push_back(d * n2 + b);
  };
  for (int c = 0; c < components; ++c) {
    for (int a = 0; a < n2; ++a) {
      velocity_cols(a);
      if (with_pressure)
        for (int b : nbr[a])
          if (b < nv) inner_.push_back(nvel + b);
      outer_[c * n2 + a + 1] = static_cast<int>(inner_.size());
    }
  }
  if (with_pressure) {
    for (int v = 0; v < nv; ++v) {
      velocity_cols(v);
      outer_[nvel + v + 1] = static_cast<int>(inner_.size());
    }
  }
}

SparseMatrix SystemPattern::zero_matrix() const {
  SparseMatrix m(n_, n_);
  m.resizeNonZeros(static_cast<Eigen::Index>(inner_.size()));
  std::copy(outer_.begin(), outer_.end(), m.outerIndexPtr());
  std::copy(inner_.begin(), inner_.end(), m.innerIndexPtr());
  std::fill(m.valuePtr(), m.valuePtr() + inner_.size(), 0.0);
  return m;
}

void MatrixAssembler::add(int row, int col, double value) {
  const int* inner = m_.innerIndexPtr();
  const int* begin = inner + m_.outerIndexPtr()[row];
  const int* end = inner + m_.outerIndexPtr()[row + 1];
  const int* it = std::lower_bound(begin, end, col);
  if (it == end || *it != col)
    throw std::logic_error("entry (" + std::to_string(row) + "," + std::to_string(col) + ") outside pattern");
  m_.valuePtr()[it - inner] += value;
}

std::vector<Vec2> TaylorHoodSpace::dof_coords() const {
  std::vector<Vec2> out(coords_);
  out.insert(out.end(), coords_.begin(), coords_.end());
  out.insert(out.end(), mesh_->vertices().begin(), mesh_->vertices().end());
  return out;
}

}  // namespace vortishape::fem
