#include "vortishape/fem/assembly.hpp"

#include <cmath>
#include <stdexcept>

namespace vortishape::fem {

namespace {

struct QuadPoint {
  double w;
  Vec2 x;
  std::array<double, 6> phi;
  std::array<Vec2, 6> dphi;
  std::array<double, 3> psi;
};

void quad_points(const Element& el, const TriangleRule& rule, std::vector<QuadPoint>& out) {
  out.resize(rule.points.size());
  const double area = std::abs(el.area);
  for (size_t q = 0; q < rule.points.size(); ++q) {
    const auto& l = rule.points[q];
    out[q].w = rule.weights[q] * area;
    out[q].x = el.point(l);
    out[q].phi = p2_values(l);
    out[q].dphi = p2_gradients(l, el.grad_lambda);
    out[q].psi = l;
  }
}

struct LocalVelocity {
  double c[2][6];
};

LocalVelocity gather(const TaylorHoodSpace& space, const Vector& u, const Element& el) {
  const int n2 = space.num_p2_nodes();
  LocalVelocity lv;
  for (int a = 0; a < 6; ++a) {
    lv.c[0][a] = u[el.nodes[a]];
    lv.c[1][a] = u[n2 + el.nodes[a]];
  }
  return lv;
}

Vec2 value_at(const LocalVelocity& lv, const QuadPoint& qp) {
  Vec2 v = Vec2::Zero();
  for (int a = 0; a < 6; ++a) v += Vec2(lv.c[0][a], lv.c[1][a]) * qp.phi[a];
  return v;
}

// g(c, d) = d w_c / d x_d
Eigen::Matrix2d grad_at(const LocalVelocity& lv, const QuadPoint& qp) {
  Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
  for (int a = 0; a < 6; ++a)
    for (int c = 0; c < 2; ++c) g.row(c) += lv.c[c][a] * qp.dphi[a].transpose();
  return g;
}

void check_velocity(const TaylorHoodSpace& space, const Vector& w) {
  if (w.size() != space.num_velocity_dofs()) throw std::invalid_argument("velocity vector has wrong length");
}

using Local15 = double[15][15];

std::array<int, 15> local_dofs(const TaylorHoodSpace& space, const Element& el) {
  std::array<int, 15> d{};
  for (int a = 0; a < 6; ++a) {
    d[a] = space.velocity_dof(0, el.nodes[a]);
    d[6 + a] = space.velocity_dof(1, el.nodes[a]);
  }
  for (int i = 0; i < 3; ++i) d[12 + i] = space.pressure_dof(el.nodes[i]);
  return d;
}

// Calls body(el, qps, K) per triangle and scatters K into a full-size matrix.
template <class Body>
SparseMatrix assemble_volume(const TaylorHoodSpace& space, const TriangleRule& rule, Body body) {
  SparseMatrix m = SystemPattern(space, 2, true).zero_matrix();
  MatrixAssembler asmb(m);
  std::vector<QuadPoint> qps;
  for (int t = 0; t < space.mesh().num_triangles(); ++t) {
    const Element el = element(space, t);
    quad_points(el, rule, qps);
    double k[15][15] = {};
    body(el, qps, k);
    asmb.add_block<15, 15>(local_dofs(space, el), local_dofs(space, el), k);
  }
  return m;
}

struct EdgePoint {
  double w;
  Vec2 x;
  std::array<double, 6> phi;
};

// Calls body(el, local_edge, normal, points, K) per outflow edge.
template <class Body>
void for_outflow_edges(const TaylorHoodSpace& space, Body body) {
  const auto& m = space.mesh();
  const LineRule& rule = gauss_line_rule(4);
  std::vector<EdgePoint> pts(rule.points.size());
  for (int b = 0; b < static_cast<int>(m.boundary_edges().size()); ++b) {
    if (m.boundary_edges()[b].tag != BoundaryTag::Outflow) continue;
    const int t = m.boundary_triangle(b);
    const int k = m.boundary_local_edge(b);
    const Element el = element(space, t);
    const double len = m.edge_length(b);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const auto l = edge_barycentric(k, rule.points[q]);
      pts[q].w = rule.weights[q] * len;
      pts[q].x = el.point(l);
      pts[q].phi = p2_values(l);
    }
    body(el, k, m.edge_normal(b), pts);
  }
}

Vec2 edge_value(const LocalVelocity& lv, const EdgePoint& p) {
  Vec2 v = Vec2::Zero();
  for (int a = 0; a < 6; ++a) v += Vec2(lv.c[0][a], lv.c[1][a]) * p.phi[a];
  return v;
}

template <class Body>
SparseMatrix assemble_outflow(const TaylorHoodSpace& space, Body body) {
  SparseMatrix m = SystemPattern(space, 2, true).zero_matrix();
  MatrixAssembler asmb(m);
  for_outflow_edges(space, [&](const Element& el, int k, const Vec2& n, const std::vector<EdgePoint>& pts) {
    double kk[15][15] = {};
    body(el, k, n, pts, kk);
    asmb.add_block<15, 15>(local_dofs(space, el), local_dofs(space, el), kk);
  });
  return m;
}

}  // namespace

SparseMatrix assemble_a(const TaylorHoodSpace& space, double nu, const TriangleRule& rule) {
  return assemble_volume(space, rule, [&](const Element&, const std::vector<QuadPoint>& qps, Local15& k) {
    for (const auto& qp : qps)
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) {
          const double v = nu * qp.w * qp.dphi[a].dot(qp.dphi[b]);
          k[a][b] += v;
          k[6 + a][6 + b] += v;
        }
  });
}

SparseMatrix assemble_b(const TaylorHoodSpace& space, const Vector& w, const TriangleRule& rule) {
  check_velocity(space, w);
  return assemble_volume(space, rule, [&](const Element& el, const std::vector<QuadPoint>& qps, Local15& k) {
    const auto lw = gather(space, w, el);
    for (const auto& qp : qps) {
      const Vec2 wv = value_at(lw, qp);
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) {
          const double v = qp.w * wv.dot(qp.dphi[b]) * qp.phi[a];
          k[a][b] += v;
          k[6 + a][6 + b] += v;
        }
    }
  });
}

SparseMatrix assemble_b_transport(const TaylorHoodSpace& space, const Vector& w, const TriangleRule& rule) {
  check_velocity(space, w);
  return assemble_volume(space, rule, [&](const Element& el, const std::vector<QuadPoint>& qps, Local15& k) {
    const auto lw = gather(space, w, el);
    for (const auto& qp : qps) {
      const Eigen::Matrix2d g = grad_at(lw, qp);
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) {
          const double pp = qp.w * qp.phi[a] * qp.phi[b];
          for (int c = 0; c < 2; ++c)
            for (int d = 0; d < 2; ++d) k[6 * c + a][6 * d + b] += pp * g(c, d);
        }
    }
  });
}

SparseMatrix assemble_outflow_c(const TaylorHoodSpace& space, const Vector& w) {
  check_velocity(space, w);
  return assemble_outflow(space, [&](const Element& el, int k, const Vec2& n, const std::vector<EdgePoint>& pts,
                                     Local15& kk) {
    const auto lw = gather(space, w, el);
    const auto en = local_edge_nodes(k);
    for (const auto& p : pts) {
      const double wn = edge_value(lw, p).dot(n);
      for (int a : en)
        for (int b : en) {
          const double v = p.w * wn * p.phi[a] * p.phi[b];
          kk[a][b] += v;
          kk[6 + a][6 + b] += v;
        }
    }
  });
}

SparseMatrix assemble_outflow_c_transport(const TaylorHoodSpace& space, const Vector& w) {
  check_velocity(space, w);
  return assemble_outflow(space, [&](const Element& el, int k, const Vec2& n, const std::vector<EdgePoint>& pts,
                                     Local15& kk) {
    const auto lw = gather(space, w, el);
    const auto en = local_edge_nodes(k);
    for (const auto& p : pts) {
      const Vec2 wv = edge_value(lw, p);
      for (int a : en)
        for (int b : en)
          for (int c = 0; c < 2; ++c)
            for (int d = 0; d < 2; ++d) kk[6 * c + a][6 * d + b] += p.w * p.phi[b] * n[d] * wv[c] * p.phi[a];
    }
  });
}

SparseMatrix assemble_d(const TaylorHoodSpace& space, const TriangleRule& rule) {
  return assemble_volume(space, rule, [&](const Element&, const std::vector<QuadPoint>& qps, Local15& k) {
    for (const auto& qp : qps)
      for (int a = 0; a < 6; ++a)
        for (int i = 0; i < 3; ++i)
          for (int c = 0; c < 2; ++c) {
            const double v = -qp.w * qp.psi[i] * qp.dphi[a][c];
            k[6 * c + a][12 + i] += v;
            k[12 + i][6 * c + a] += v;
          }
  });
}

void assemble_jacobian(const TaylorHoodSpace& space, double nu, const Vector& w, bool newton, SparseMatrix& out,
                       const TriangleRule& rule) {
  check_velocity(space, w);
  if (out.rows() != space.num_dofs() || out.nonZeros() == 0) out = SystemPattern(space, 2, true).zero_matrix();
  std::fill(out.valuePtr(), out.valuePtr() + out.nonZeros(), 0.0);
  MatrixAssembler asmb(out);
  std::vector<QuadPoint> qps;
  for (int t = 0; t < space.mesh().num_triangles(); ++t) {
    const Element el = element(space, t);
    quad_points(el, rule, qps);
    const auto lw = gather(space, w, el);
    double k[15][15] = {};
    for (const auto& qp : qps) {
      const Vec2 wv = value_at(lw, qp);
      const Eigen::Matrix2d g = grad_at(lw, qp);
      for (int a = 0; a < 6; ++a) {
        for (int b = 0; b < 6; ++b) {
          const double diag = qp.w * (nu * qp.dphi[a].dot(qp.dphi[b]) + wv.dot(qp.dphi[b]) * qp.phi[a]);
          k[a][b] += diag;
          k[6 + a][6 + b] += diag;
          if (newton) {
            const double pp = qp.w * qp.phi[a] * qp.phi[b];
            k[a][b] += pp * g(0, 0);
            k[a][6 + b] += pp * g(0, 1);
            k[6 + a][b] += pp * g(1, 0);
            k[6 + a][6 + b] += pp * g(1, 1);
          }
        }
        for (int i = 0; i < 3; ++i)
          for (int c = 0; c < 2; ++c) {
            const double v = -qp.w * qp.psi[i] * qp.dphi[a][c];
            k[6 * c + a][12 + i] += v;
            k[12 + i][6 * c + a] += v;
          }
      }
    }
    const auto dofs = local_dofs(space, el);
    asmb.add_block<15, 15>(dofs, dofs, k);
  }
  for_outflow_edges(space, [&](const Element& el, int k, const Vec2& n, const std::vector<EdgePoint>& pts) {
    const auto lw = gather(space, w, el);
    const auto en = local_edge_nodes(k);
    double kk[15][15] = {};
    for (const auto& p : pts) {
      const Vec2 wv = edge_value(lw, p);
      const double wn = wv.dot(n);
      for (int a : en)
        for (int b : en) {
          const double pp = p.w * p.phi[a] * p.phi[b];
          kk[a][b] -= 0.5 * pp * wn;
          kk[6 + a][6 + b] -= 0.5 * pp * wn;
          if (newton)
            for (int c = 0; c < 2; ++c)
              for (int d = 0; d < 2; ++d) kk[6 * c + a][6 * d + b] -= 0.5 * pp * n[d] * wv[c];
        }
    }
    const auto dofs = local_dofs(space, el);
    asmb.add_block<15, 15>(dofs, dofs, kk);
  });
}

Vector assemble_load(const TaylorHoodSpace& space, const VectorFunction& f, const TriangleRule& rule) {
  Vector r = Vector::Zero(space.num_dofs());
  if (!f) return r;
  std::vector<QuadPoint> qps;
  for (int t = 0; t < space.mesh().num_triangles(); ++t) {
    const Element el = element(space, t);
    quad_points(el, rule, qps);
    for (const auto& qp : qps) {
      const Vec2 fv = f(qp.x);
      for (int a = 0; a < 6; ++a)
        for (int c = 0; c < 2; ++c) r[space.velocity_dof(c, el.nodes[a])] += qp.w * fv[c] * qp.phi[a];
    }
  }
  return r;
}

Vector assemble_outflow_load(const TaylorHoodSpace& space, const VectorFunction& h) {
  Vector r = Vector::Zero(space.num_dofs());
  if (!h) return r;
  for_outflow_edges(space, [&](const Element& el, int k, const Vec2&, const std::vector<EdgePoint>& pts) {
    for (const auto& p : pts) {
      const Vec2 hv = h(p.x);
      for (int a : local_edge_nodes(k))
        for (int c = 0; c < 2; ++c) r[space.velocity_dof(c, el.nodes[a])] += p.w * hv[c] * p.phi[a];
    }
  });
  return r;
}

Vector assemble_newton_rhs(const TaylorHoodSpace& space, const Vector& w, const TriangleRule& rule) {
  check_velocity(space, w);
  Vector r = Vector::Zero(space.num_dofs());
  std::vector<QuadPoint> qps;
  for (int t = 0; t < space.mesh().num_triangles(); ++t) {
    const Element el = element(space, t);
    quad_points(el, rule, qps);
    const auto lw = gather(space, w, el);
    for (const auto& qp : qps) {
      const Vec2 conv = grad_at(lw, qp) * value_at(lw, qp);
      for (int a = 0; a < 6; ++a)
        for (int c = 0; c < 2; ++c) r[space.velocity_dof(c, el.nodes[a])] += qp.w * conv[c] * qp.phi[a];
    }
  }
  for_outflow_edges(space, [&](const Element& el, int k, const Vec2& n, const std::vector<EdgePoint>& pts) {
    const auto lw = gather(space, w, el);
    for (const auto& p : pts) {
      const Vec2 wv = edge_value(lw, p);
      const double wn = wv.dot(n);
      for (int a : local_edge_nodes(k))
        for (int c = 0; c < 2; ++c) r[space.velocity_dof(c, el.nodes[a])] -= 0.5 * p.w * wn * wv[c] * p.phi[a];
    }
  });
  return r;
}

Vector assemble_operator(const TaylorHoodSpace& space, double nu, const Vector& x, const TriangleRule& rule) {
  if (x.size() != space.num_dofs()) throw std::invalid_argument("state vector has wrong length");
  const Vector u = x.head(space.num_velocity_dofs());
  Vector r = Vector::Zero(space.num_dofs());
  std::vector<QuadPoint> qps;
  for (int t = 0; t < space.mesh().num_triangles(); ++t) {
    const Element el = element(space, t);
    quad_points(el, rule, qps);
    const auto lu = gather(space, u, el);
    double lp[3];
    for (int i = 0; i < 3; ++i) lp[i] = x[space.pressure_dof(el.nodes[i])];
    for (const auto& qp : qps) {
      const Vec2 uv = value_at(lu, qp);
      const Eigen::Matrix2d g = grad_at(lu, qp);
      const Vec2 conv = g * uv;
      const double div = g(0, 0) + g(1, 1);
      const double p = lp[0] * qp.psi[0] + lp[1] * qp.psi[1] + lp[2] * qp.psi[2];
      for (int a = 0; a < 6; ++a)
        for (int c = 0; c < 2; ++c)
          r[space.velocity_dof(c, el.nodes[a])] +=
              qp.w * (nu * g.row(c).dot(qp.dphi[a]) + conv[c] * qp.phi[a] - p * qp.dphi[a][c]);
      for (int i = 0; i < 3; ++i) r[space.pressure_dof(el.nodes[i])] -= qp.w * qp.psi[i] * div;
    }
  }
  for_outflow_edges(space, [&](const Element& el, int k, const Vec2& n, const std::vector<EdgePoint>& pts) {
    const auto lu = gather(space, u, el);
    for (const auto& p : pts) {
      const Vec2 uv = edge_value(lu, p);
      const double un = uv.dot(n);
      for (int a : local_edge_nodes(k))
        for (int c = 0; c < 2; ++c) r[space.velocity_dof(c, el.nodes[a])] -= 0.5 * p.w * un * uv[c] * p.phi[a];
    }
  });
  return r;
}

DirichletData velocity_dirichlet(const TaylorHoodSpace& space, const BoundaryFunction& g) {
  const auto& m = space.mesh();
  const int n2 = space.num_p2_nodes();
  // 0: free, 1: inflow, 2: wall or obstacle
  std::vector<int> rank(n2, 0);
  std::vector<BoundaryTag> tag(n2, BoundaryTag::Outflow);
  for (int b = 0; b < static_cast<int>(m.boundary_edges().size()); ++b) {
    const BoundaryTag t = m.boundary_edges()[b].tag;
    const int r = t == BoundaryTag::Inflow ? 1 : (t == BoundaryTag::Wall || t == BoundaryTag::Free) ? 2 : 0;
    if (r == 0) continue;
    for (int node : space.boundary_edge_nodes(b))
      if (r > rank[node]) {
        rank[node] = r;
        tag[node] = t;
      }
  }
  DirichletData d;
  for (int c = 0; c < 2; ++c)
    for (int node = 0; node < n2; ++node) {
      if (rank[node] == 0) continue;
      d.dofs.push_back(space.velocity_dof(c, node));
      d.values.push_back(g ? g(space.node_coords()[node], tag[node])[c] : 0.0);
    }
  return d;
}

DirichletData homogeneous_velocity_dirichlet(const TaylorHoodSpace& space) {
  return velocity_dirichlet(space, nullptr);
}

void apply_dirichlet(SparseSystem& system, const DirichletData& data) {
  auto& a = system.matrix;
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n || system.rhs.size() != n) throw std::invalid_argument("system dimension mismatch");
  if (data.dofs.size() != data.values.size()) throw std::invalid_argument("dirichlet data mismatch");
  a.makeCompressed();
  std::vector<char> fixed(n, 0);
  Vector g = Vector::Zero(n);
  for (size_t i = 0; i < data.dofs.size(); ++i) {
    const int d = data.dofs[i];
    if (d < 0 || d >= n) throw std::out_of_range("dirichlet dof out of range");
    fixed[d] = 1;
    g[d] = data.values[i];
  }
  for (int r = 0; r < n; ++r) {
    bool has_diag = false;
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) {
      const int c = static_cast<int>(it.col());
      if (fixed[r]) {
        it.valueRef() = (c == r) ? 1.0 : 0.0;
        has_diag |= (c == r);
      } else if (fixed[c]) {
        system.rhs[r] -= it.value() * g[c];
        it.valueRef() = 0.0;
      }
    }
    if (fixed[r]) {
      if (!has_diag) a.coeffRef(r, r) = 1.0;
      system.rhs[r] = g[r];
    }
  }
}

}  // namespace vortishape::fem
