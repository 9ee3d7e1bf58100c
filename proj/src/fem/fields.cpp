#include "vortishape/fem/fields.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>

namespace vortishape::fem {

Vector interpolate_velocity(const TaylorHoodSpace& space, const VectorFunction& f) {
  const int n2 = space.num_p2_nodes();
  Vector u(2 * n2);
  for (int i = 0; i < n2; ++i) {
    const Vec2 v = f(space.node_coords()[i]);
    u[i] = v.x();
    u[n2 + i] = v.y();
  }
  return u;
}

Vector interpolate_p1(const TaylorHoodSpace& space, const ScalarFunction& f) {
  Vector p(space.num_vertices());
  for (int i = 0; i < space.num_vertices(); ++i) p[i] = f(space.node_coords()[i]);
  return p;
}

VelocitySample sample_velocity(const TaylorHoodSpace& space, const Vector& u, int tri, const std::array<double, 3>& l) {
  const Element el = element(space, tri);
  const auto phi = p2_values(l);
  const auto dphi = p2_gradients(l, el.grad_lambda);
  const int n2 = space.num_p2_nodes();
  VelocitySample s{Vec2::Zero(), Eigen::Matrix2d::Zero()};
  for (int a = 0; a < 6; ++a) {
    const double ux = u[el.nodes[a]], uy = u[n2 + el.nodes[a]];
    s.value += Vec2(ux, uy) * phi[a];
    s.grad.row(0) += ux * dphi[a].transpose();
    s.grad.row(1) += uy * dphi[a].transpose();
  }
  return s;
}

double sample_p1(const TaylorHoodSpace& space, const Vector& p, int tri, const std::array<double, 3>& l) {
  const auto& t = space.mesh().triangles()[tri];
  return l[0] * p[t[0]] + l[1] * p[t[1]] + l[2] * p[t[2]];
}

std::vector<std::array<double, 3>> curl_per_triangle(const TaylorHoodSpace& space, const Vector& u) {
  if (u.size() != space.num_velocity_dofs()) throw std::invalid_argument("velocity vector has wrong length");
  std::vector<std::array<double, 3>> out(space.mesh().num_triangles());
  for (int t = 0; t < space.mesh().num_triangles(); ++t)
    for (int k = 0; k < 3; ++k) {
      std::array<double, 3> l{0.0, 0.0, 0.0};
      l[k] = 1.0;
      const auto g = sample_velocity(space, u, t, l).grad;
      out[t][k] = g(1, 0) - g(0, 1);
    }
  return out;
}

Vector curl_p1(const TaylorHoodSpace& space, const Vector& u) {
  const auto raw = curl_per_triangle(space, u);
  const int nv = space.num_vertices();
  std::vector<Eigen::Triplet<double>> trip;
  Vector rhs = Vector::Zero(nv);
  for (int t = 0; t < space.mesh().num_triangles(); ++t) {
    const auto& tr = space.mesh().triangles()[t];
    const double area = std::abs(space.mesh().signed_area(t));
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double m = area * (i == j ? 2.0 : 1.0) / 12.0;
        trip.emplace_back(tr[i], tr[j], m);
        rhs[tr[i]] += m * raw[t][j];
      }
    }
  }
  Eigen::SparseMatrix<double> mass(nv, nv);
  mass.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(mass);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("mass matrix factorization failed");
  return ldlt.solve(rhs);
}

double vorticity_squared(const TaylorHoodSpace& space, const Vector& u) {
  const auto raw = curl_per_triangle(space, u);
  double s = 0.0;
  for (int t = 0; t < space.mesh().num_triangles(); ++t) {
    const auto& c = raw[t];
    // exact integral of a squared linear function
    const double sum = c[0] + c[1] + c[2];
    const double sq = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
    s += std::abs(space.mesh().signed_area(t)) * (sq + sum * sum) / 12.0;
  }
  return s;
}

std::vector<EdgeSamples> normal_derivative(const TaylorHoodSpace& space, const Vector& u, BoundaryTag tag,
                                           int points_per_edge) {
  const auto& m = space.mesh();
  if (!m.has_tag(tag)) throw std::invalid_argument("no boundary edges with tag " + std::string(mesh::to_string(tag)));
  const LineRule& rule = gauss_line_rule(points_per_edge);
  std::vector<EdgeSamples> out;
  for (int b = 0; b < static_cast<int>(m.boundary_edges().size()); ++b) {
    if (m.boundary_edges()[b].tag != tag) continue;
    EdgeSamples s;
    s.edge = b;
    const int t = m.boundary_triangle(b);
    const int k = m.boundary_local_edge(b);
    const Vec2 n = m.edge_normal(b);
    const double len = m.edge_length(b);
    const Element el = element(space, t);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const auto l = edge_barycentric(k, rule.points[q]);
      s.points.push_back(el.point(l));
      s.weights.push_back(rule.weights[q] * len);
      s.values.push_back(sample_velocity(space, u, t, l).grad * n);
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

template <class Eval>
Norms integrate_norms(const TaylorHoodSpace& space, const TriangleRule& rule, Eval eval) {
  double l2 = 0.0, h1 = 0.0;
  for (int t = 0; t < space.mesh().num_triangles(); ++t) {
    const double area = std::abs(space.mesh().signed_area(t));
    for (size_t q = 0; q < rule.points.size(); ++q) {
      double v2 = 0.0, g2 = 0.0;
      eval(t, rule.points[q], v2, g2);
      l2 += rule.weights[q] * area * v2;
      h1 += rule.weights[q] * area * g2;
    }
  }
  return Norms{std::sqrt(l2), std::sqrt(h1), std::sqrt(l2 + h1)};
}

}  // namespace

Norms velocity_norms(const TaylorHoodSpace& space, const Vector& u) {
  if (u.size() != space.num_velocity_dofs()) throw std::invalid_argument("velocity vector has wrong length");
  return integrate_norms(space, triangle_rule_deg5(), [&](int t, const std::array<double, 3>& l, double& v2, double& g2) {
    const auto s = sample_velocity(space, u, t, l);
    v2 = s.value.squaredNorm();
    g2 = s.grad.squaredNorm();
  });
}

Norms p1_norms(const TaylorHoodSpace& space, const Vector& p) {
  if (p.size() != space.num_vertices()) throw std::invalid_argument("P1 vector has wrong length");
  return integrate_norms(space, triangle_rule_deg5(), [&](int t, const std::array<double, 3>& l, double& v2, double& g2) {
    const Element el = element(space, t);
    const auto& tr = space.mesh().triangles()[t];
    const double v = l[0] * p[tr[0]] + l[1] * p[tr[1]] + l[2] * p[tr[2]];
    const Vec2 g = p[tr[0]] * el.grad_lambda[0] + p[tr[1]] * el.grad_lambda[1] + p[tr[2]] * el.grad_lambda[2];
    v2 = v * v;
    g2 = g.squaredNorm();
  });
}

Norms p2_scalar_norms(const TaylorHoodSpace& space, const Vector& s) {
  if (s.size() != space.num_p2_nodes()) throw std::invalid_argument("P2 vector has wrong length");
  return integrate_norms(space, triangle_rule_deg5(), [&](int t, const std::array<double, 3>& l, double& v2, double& g2) {
    const Element el = element(space, t);
    const auto phi = p2_values(l);
    const auto dphi = p2_gradients(l, el.grad_lambda);
    double v = 0.0;
    Vec2 g = Vec2::Zero();
    for (int a = 0; a < 6; ++a) {
      v += s[el.nodes[a]] * phi[a];
      g += s[el.nodes[a]] * dphi[a];
    }
    v2 = v * v;
    g2 = g.squaredNorm();
  });
}

Norms velocity_error(const TaylorHoodSpace& space, const Vector& u, const VectorFunction& exact,
                     const GradientFunction& exact_grad) {
  return integrate_norms(space, triangle_rule_deg8(), [&](int t, const std::array<double, 3>& l, double& v2, double& g2) {
    const auto s = sample_velocity(space, u, t, l);
    const Element el = element(space, t);
    const Vec2 x = el.point(l);
    v2 = (s.value - exact(x)).squaredNorm();
    g2 = exact_grad ? (s.grad - exact_grad(x)).squaredNorm() : 0.0;
  });
}

Norms pressure_error(const TaylorHoodSpace& space, const Vector& p, const ScalarFunction& exact) {
  Norms n = integrate_norms(space, triangle_rule_deg8(), [&](int t, const std::array<double, 3>& l, double& v2, double& g2) {
    const Element el = element(space, t);
    const double d = sample_p1(space, p, t, l) - exact(el.point(l));
    v2 = d * d;
    g2 = 0.0;
  });
  n.h1 = n.h1_semi = 0.0;
  return n;
}

PointLocator::PointLocator(const mesh::Mesh& mesh) : mesh_(mesh) {
  const auto& x = mesh.vertices();
  lo_ = hi_ = x.front();
  for (const auto& p : x) {
    lo_ = lo_.cwiseMin(p);
    hi_ = hi_.cwiseMax(p);
  }
  const double extent = std::max(hi_.x() - lo_.x(), hi_.y() - lo_.y());
  const double target = std::sqrt(std::max(1.0, static_cast<double>(mesh.num_triangles())) / 2.0);
  cell_ = std::max(extent / target, 1e-12);
  nx_ = std::max(1, static_cast<int>(std::ceil((hi_.x() - lo_.x()) / cell_)));
  ny_ = std::max(1, static_cast<int>(std::ceil((hi_.y() - lo_.y()) / cell_)));
  buckets_.assign(static_cast<size_t>(nx_) * ny_, {});
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tr = mesh.triangles()[t];
    Vec2 a = x[tr[0]], b = x[tr[0]];
    for (int v : tr) {
      a = a.cwiseMin(x[v]);
      b = b.cwiseMax(x[v]);
    }
    const int i0 = std::clamp(static_cast<int>((a.x() - lo_.x()) / cell_), 0, nx_ - 1);
    const int i1 = std::clamp(static_cast<int>((b.x() - lo_.x()) / cell_), 0, nx_ - 1);
    const int j0 = std::clamp(static_cast<int>((a.y() - lo_.y()) / cell_), 0, ny_ - 1);
    const int j1 = std::clamp(static_cast<int>((b.y() - lo_.y()) / cell_), 0, ny_ - 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) buckets_[static_cast<size_t>(j) * nx_ + i].push_back(t);
  }
}

namespace {
std::array<double, 3> barycentric(const mesh::Mesh& m, int t, const Vec2& p) {
  const auto& tr = m.triangles()[t];
  const Vec2& a = m.vertices()[tr[0]];
  const Vec2& b = m.vertices()[tr[1]];
  const Vec2& c = m.vertices()[tr[2]];
  const double det = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
  const double l1 = ((p.x() - a.x()) * (c.y() - a.y()) - (p.y() - a.y()) * (c.x() - a.x())) / det;
  const double l2 = ((b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x())) / det;
  return {1.0 - l1 - l2, l1, l2};
}
}  // namespace

PointLocator::Hit PointLocator::locate(const Vec2& p) const {
  constexpr double tol = -1e-12;
  const int i = static_cast<int>(std::floor((p.x() - lo_.x()) / cell_));
  const int j = static_cast<int>(std::floor((p.y() - lo_.y()) / cell_));
  if (i >= 0 && i < nx_ && j >= 0 && j < ny_) {
    for (int t : buckets_[static_cast<size_t>(j) * nx_ + i]) {
      const auto l = barycentric(mesh_, t, p);
      if (l[0] >= tol && l[1] >= tol && l[2] >= tol) return Hit{t, l, true};
    }
  }
  Hit best;
  double best_d = std::numeric_limits<double>::infinity();
  const auto& x = mesh_.vertices();
  for (int t = 0; t < mesh_.num_triangles(); ++t) {
    const auto& tr = mesh_.triangles()[t];
    double d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) d = std::min(d, mesh::point_segment_distance(p, x[tr[k]], x[tr[(k + 1) % 3]]));
    if (d < best_d) {
      best_d = d;
      best.tri = t;
    }
  }
  best.bary = barycentric(mesh_, best.tri, p);
  best.inside = false;
  return best;
}

void write_vtk(const std::string& path, const TaylorHoodSpace& space, const std::vector<VtkField>& fields) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  const auto& m = space.mesh();
  const int nv = m.num_vertices();
  const int n2 = space.num_p2_nodes();
  f << std::setprecision(12);
  f << "# vtk DataFile Version 3.0\nvortishape\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  f << "POINTS " << nv << " double\n";
  for (const auto& p : m.vertices()) f << p.x() << ' ' << p.y() << " 0\n";
  f << "CELLS " << m.num_triangles() << ' ' << 4 * m.num_triangles() << '\n';
  for (const auto& t : m.triangles()) f << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  f << "CELL_TYPES " << m.num_triangles() << '\n';
  for (int t = 0; t < m.num_triangles(); ++t) f << "5\n";
  if (fields.empty()) return;
  f << "POINT_DATA " << nv << '\n';
  for (const auto& fld : fields) {
    if (fld.vector) {
      if (fld.values.size() != 2 * n2) throw std::invalid_argument("vector field " + fld.name + " has wrong length");
      f << "VECTORS " << fld.name << " double\n";
      for (int v = 0; v < nv; ++v) f << fld.values[v] << ' ' << fld.values[n2 + v] << " 0\n";
    } else {
      if (fld.values.size() != nv && fld.values.size() != n2)
        throw std::invalid_argument("scalar field " + fld.name + " has wrong length");
      f << "SCALARS " << fld.name << " double 1\nLOOKUP_TABLE default\n";
      for (int v = 0; v < nv; ++v) f << fld.values[v] << '\n';
    }
  }
}

}  // namespace vortishape::fem
