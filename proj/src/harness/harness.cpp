#include "vortishape/harness/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "vortishape/adjoint/adjoint.hpp"
#include "vortishape/fem/fields.hpp"
#include "vortishape/fem/quadrature.hpp"
#include "vortishape/shape/shape.hpp"

namespace vortishape::harness {

int worker_count() {
  const char* env = std::getenv("VORTISHAPE_THREADS");
  if (!env) return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || n < 1) return 1;
  return static_cast<int>(std::min<long>(n, 256));
}

void parallel_for(int n, const std::function<void(int)>& f) {
  const int workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(n);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// RFC 4180 quoting for free-text fields.
std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path, const std::string& header) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(f, line) || line != header)
    throw std::runtime_error(path + ": expected header '" + header + "'");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(f, line))
    if (!line.empty()) rows.push_back(split_csv(line));
  return rows;
}

double bump(double d, double r, double width) {
  if (d >= r + width) return 0.0;
  const double c = std::cos(0.5 * M_PI * std::max(0.0, d - r) / width);
  return c * c;
}

std::string opt_fmt(const std::optional<double>& v, int prec = 4) {
  if (!v) return "-";
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << *v;
  return os.str();
}

std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(4) << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------

FdReport fd_gradient_check(const OptConfig& c, const std::function<Vec2(const Vec2&)>& theta,
                           const std::vector<double>& t_list, const Mesh* mesh) {
  c.validate();
  const Mesh m = mesh ? *mesh : mesh::generate_channel_mesh(c.rect, c.center, c.radius, c.h);
  std::vector<Vec2> disp(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) disp[v] = theta(m.vertices()[v]);
  for (const auto& e : m.boundary_edges())
    if (e.tag != mesh::BoundaryTag::Free)
      for (int v : e.v)
        if (disp[v].norm() > 1e-14) throw std::invalid_argument("test field must vanish on the outer boundary");

  const optimizer::Iterate base = optimizer::evaluate(m, c);
  const auto adj = adjoint::solve_adjoint(*base.space, base.state, c.nu, c.gamma);
  const auto ext = shape::extend_normal(*base.space, c.eps3);
  const auto grad = shape::shape_gradient(*base.space, base.state.u, adj.v, ext.kappa, c.alpha, c.gamma, c.nu);

  FdReport r;
  r.derivative = shape::directional_derivative(m, grad.grad_g, disp);
  r.g0 = base.obj.G;
  for (double t : t_list) {
    const Mesh moved = mesh::move_mesh(m, disp, t);
    if (mesh::check_mesh(moved).inverted_count > 0)
      throw std::runtime_error("mesh degenerates at t = " + num(t));
    const double gt = optimizer::evaluate(moved, c, &base.state).obj.G;
    const double q = (gt - r.g0) / t;
    r.t.push_back(t);
    r.quotient.push_back(q);
    r.rel_error.push_back(q == 0.0 ? std::abs(r.derivative) : std::abs(r.derivative - q) / std::abs(q));
  }
  // least-squares slope of log |q - dG| against log t
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  bool defined = r.t.size() >= 2;
  for (size_t i = 0; i < r.t.size(); ++i) {
    const double e = std::abs(r.quotient[i] - r.derivative);
    if (!(e > 0.0)) {
      defined = false;
      break;
    }
    const double x = std::log(r.t[i]), y = std::log(e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  r.order = defined ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : std::numeric_limits<double>::quiet_NaN();
  return r;
}

std::function<Vec2(const Vec2&)> translation_field(const OptConfig& c, const Vec2& dir, double width) {
  const Vec2 ctr = c.center;
  const double r = c.radius;
  return [ctr, r, dir, width](const Vec2& x) { return Vec2(bump((x - ctr).norm(), r, width) * dir); };
}

std::function<Vec2(const Vec2&)> stretch_field(const OptConfig& c, double width) {
  const Vec2 ctr = c.center;
  const double r = c.radius;
  return [ctr, r, width](const Vec2& x) {
    return Vec2(bump((x - ctr).norm(), r, width) * (x.x() - ctr.x()) / r, 0.0);
  };
}

// ---------------------------------------------------------------------------

std::vector<std::optional<double>> eoc(const std::vector<double>& h, const std::vector<double>& e) {
  if (h.size() != e.size()) throw std::invalid_argument("level and error lists differ in length");
  std::vector<std::optional<double>> out;
  for (size_t k = 1; k < e.size(); ++k) {
    if (e[k - 1] > 0.0 && e[k] > 0.0 && h[k - 1] != h[k])
      out.push_back(std::log(e[k - 1] / e[k]) / std::log(h[k - 1] / h[k]));
    else
      out.push_back(std::nullopt);
  }
  return out;
}

std::vector<std::optional<double>> EocTable::eoc_l2() const { return eoc(h, l2); }
std::vector<std::optional<double>> EocTable::eoc_h1() const {
  if (h1.empty()) return {};
  return eoc(h, h1);
}

void write_eoc_csv(const std::string& path, const std::vector<EocTable>& tables) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "quantity,h,l2,h1,eoc_l2,eoc_h1\n";
  for (const auto& t : tables) {
    const auto e2 = t.eoc_l2(), e1 = t.eoc_h1();
    for (size_t k = 0; k < t.h.size(); ++k) {
      f << quote(t.name) << ',' << num(t.h[k]) << ',' << num(t.l2[k]) << ',';
      if (!t.h1.empty()) f << num(t.h1[k]);
      f << ',';
      if (k > 0 && e2[k - 1]) f << num(*e2[k - 1]);
      f << ',';
      if (k > 0 && !e1.empty() && e1[k - 1]) f << num(*e1[k - 1]);
      f << '\n';
    }
  }
}

std::vector<EocTable> read_eoc_csv(const std::string& path) {
  std::vector<EocTable> out;
  for (const auto& row : read_csv(path, "quantity,h,l2,h1,eoc_l2,eoc_h1")) {
    if (row.size() != 6) throw std::runtime_error(path + ": malformed row");
    if (out.empty() || out.back().name != row[0]) out.push_back(EocTable{row[0], {}, {}, {}});
    auto& t = out.back();
    t.h.push_back(std::stod(row[1]));
    t.l2.push_back(std::stod(row[2]));
    if (!row[3].empty()) t.h1.push_back(std::stod(row[3]));
  }
  return out;
}

std::string format_eoc_summary(const std::vector<EocTable>& tables) {
  std::ostringstream os;
  for (const auto& t : tables) {
    os << t.name << '\n';
    os << "  " << std::setw(10) << "h" << std::setw(14) << "L2" << std::setw(9) << "eoc";
    if (!t.h1.empty()) os << std::setw(14) << "H1" << std::setw(9) << "eoc";
    os << '\n';
    const auto e2 = t.eoc_l2(), e1 = t.eoc_h1();
    for (size_t k = 0; k < t.h.size(); ++k) {
      os << "  " << std::setw(10) << ("1/" + std::to_string(static_cast<int>(std::lround(1.0 / t.h[k]))))
         << std::setw(14) << sci(t.l2[k]) << std::setw(9) << (k ? opt_fmt(e2[k - 1]) : "");
      if (!t.h1.empty()) os << std::setw(14) << sci(t.h1[k]) << std::setw(9) << (k ? opt_fmt(e1[k - 1]) : "");
      os << '\n';
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------

Vec2 Manufactured::u(const Vec2& x) const {
  const double X = k * (x.x() - shift.x()), Y = k * (x.y() - shift.y());
  return amplitude * Vec2(std::sin(X) * std::cos(Y), -std::cos(X) * std::sin(Y));
}

Eigen::Matrix2d Manufactured::grad_u(const Vec2& x) const {
  const double X = k * (x.x() - shift.x()), Y = k * (x.y() - shift.y());
  Eigen::Matrix2d g;
  g(0, 0) = k * std::cos(X) * std::cos(Y);
  g(0, 1) = -k * std::sin(X) * std::sin(Y);
  g(1, 0) = k * std::sin(X) * std::sin(Y);
  g(1, 1) = -k * std::cos(X) * std::cos(Y);
  return amplitude * g;
}

double Manufactured::p(const Vec2& x) const {
  const double X = k * (x.x() - shift.x()), Y = k * (x.y() - shift.y());
  return amplitude * std::cos(X) * std::cos(Y);
}

Vec2 Manufactured::forcing(const Vec2& x) const {
  const double X = k * (x.x() - shift.x()), Y = k * (x.y() - shift.y());
  const Vec2 grad_p = amplitude * k * Vec2(-std::sin(X) * std::cos(Y), -std::cos(X) * std::sin(Y));
  const Vec2 conv = amplitude * amplitude * k * Vec2(std::sin(X) * std::cos(X), std::sin(Y) * std::cos(Y));
  return 2.0 * nu * k * k * u(x) + conv + grad_p;
}

Vec2 Manufactured::outflow_traction(const Vec2& x) const {
  const Vec2 v = u(x);
  const Eigen::Matrix2d g = grad_u(x);
  return Vec2(-p(x) + nu * g(0, 0) - 0.5 * v.x() * v.x(), nu * g(1, 0) - 0.5 * v.x() * v.y());
}

flow::FlowProblem Manufactured::problem() const {
  flow::FlowProblem pb;
  pb.nu = nu;
  const Manufactured self = *this;
  pb.forcing = [self](const Vec2& x) { return self.forcing(x); };
  pb.dirichlet = [self](const Vec2& x, mesh::BoundaryTag) { return self.u(x); };
  pb.outflow_traction = [self](const Vec2& x) { return self.outflow_traction(x); };
  return pb;
}

std::vector<EocTable> manufactured_flow_eoc(const std::vector<double>& h_list, const Manufactured& ms,
                                            const mesh::Rect& rect) {
  if (h_list.size() < 3) throw std::invalid_argument("need at least 3 levels, got " + std::to_string(h_list.size()));
  EocTable vel{"velocity", h_list, std::vector<double>(h_list.size()), std::vector<double>(h_list.size())};
  EocTable pre{"pressure", h_list, std::vector<double>(h_list.size()), {}};
  parallel_for(static_cast<int>(h_list.size()), [&](int i) {
    const Mesh m = mesh::generate_rectangle_mesh(rect, h_list[i]);
    const TaylorHoodSpace s(m);
    auto [st, rep] = flow::solve_navier_stokes(s, ms.problem());
    if (!rep.converged) throw std::runtime_error("Newton failed at h = " + num(h_list[i]));
    const auto eu = fem::velocity_error(
        s, st.u, [&](const Vec2& x) { return ms.u(x); }, [&](const Vec2& x) { return ms.grad_u(x); });
    const auto ep = fem::pressure_error(s, st.p, [&](const Vec2& x) { return ms.p(x); });
    vel.l2[i] = eu.l2;
    vel.h1[i] = eu.h1;
    pre.l2[i] = ep.l2;
  });
  return {vel, pre};
}

// ---------------------------------------------------------------------------

std::vector<RunSummary> run_levels(const OptConfig& c, const std::vector<double>& h_list,
                                   const optimizer::ProgressFn& progress) {
  std::vector<RunSummary> out(h_list.size());
  parallel_for(static_cast<int>(h_list.size()), [&](int i) {
    OptConfig ci = c;
    ci.h = h_list[i];
    out[i].h = h_list[i];
    try {
      out[i].result = optimizer::run_optimization(ci, worker_count() > 1 ? optimizer::ProgressFn{} : progress);
      out[i].ok = out[i].result.status != optimizer::Status::Stalled;
      if (!out[i].ok) out[i].error = out[i].result.message;
    } catch (const std::exception& e) {
      out[i].ok = false;
      out[i].error = e.what();
    }
  });
  return out;
}

std::vector<HausdorffRow> hausdorff_table(const std::vector<RunSummary>& runs, const std::vector<Vec2>& reference) {
  std::vector<HausdorffRow> rows;
  for (const auto& r : runs) {
    HausdorffRow row;
    row.h = r.h;
    if (r.result.trace.rows.empty()) {
      row.distance = std::numeric_limits<double>::quiet_NaN();
      row.volume_variation = std::numeric_limits<double>::quiet_NaN();
      row.status = "error: " + r.error;
    } else {
      row.distance = mesh::hausdorff_distance(r.result.trace.polylines.back(), reference);
      row.volume_variation = r.result.trace.rows.front().volume - r.result.trace.rows.back().volume;
      row.iterations = static_cast<int>(r.result.trace.rows.size()) - 1;
      row.status = r.ok ? optimizer::to_string(r.result.status) : "error: " + r.error;
    }
    rows.push_back(row);
  }
  return rows;
}

void write_hausdorff_csv(const std::string& path, const std::vector<HausdorffRow>& rows) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "h,hausdorff,volume_variation,iterations,status\n";
  for (const auto& r : rows)
    f << num(r.h) << ',' << num(r.distance) << ',' << num(r.volume_variation) << ',' << r.iterations << ','
      << quote(r.status) << '\n';
}

std::vector<HausdorffRow> read_hausdorff_csv(const std::string& path) {
  std::vector<HausdorffRow> out;
  for (const auto& row : read_csv(path, "h,hausdorff,volume_variation,iterations,status")) {
    if (row.size() != 5) throw std::runtime_error(path + ": malformed row");
    out.push_back(HausdorffRow{std::stod(row[0]), std::stod(row[1]), std::stod(row[2]), std::stoi(row[3]), row[4]});
  }
  return out;
}

std::string format_hausdorff_summary(const std::vector<HausdorffRow>& rows) {
  std::ostringstream os;
  os << "  " << std::setw(8) << "h" << std::setw(14) << "d_H" << std::setw(9) << "eoc" << std::setw(14)
     << "vol.var" << std::setw(7) << "iters" << "  status\n";
  std::vector<double> h, d;
  for (const auto& r : rows) {
    h.push_back(r.h);
    d.push_back(r.distance);
  }
  const auto e = eoc(h, d);
  for (size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    os << "  " << std::setw(8) << ("1/" + std::to_string(static_cast<int>(std::lround(1.0 / r.h)))) << std::setw(14)
       << sci(r.distance) << std::setw(9) << (k ? opt_fmt(e[k - 1], 3) : "") << std::setw(14) << sci(r.volume_variation)
       << std::setw(7) << r.iterations << "  " << r.status << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------

FinalFields final_fields(const OptConfig& c, const optimizer::OptResult& r) {
  FinalFields f;
  f.space = r.final.space;
  const auto& s = *f.space;
  f.u = r.final.state.u;
  f.v = adjoint::solve_adjoint(s, r.final.state, c.nu, c.gamma).v;
  const auto ext = shape::extend_normal(s, c.eps3);
  const auto grad = shape::shape_gradient(s, f.u, f.v, ext.kappa, c.alpha, c.gamma, c.nu);
  if (c.method == shape::Method::AugLag) {
    const auto& last = r.trace.rows.back();
    const auto g = shape::lagrangian_gradient(grad.grad_g, last.ell, last.b, r.final.volume, r.target_volume);
    f.theta = shape::deformation_robin(s, g, c.eps).theta;
  } else {
    f.theta = shape::deformation_divfree(s, grad.grad_g, c.eps1, c.eps2).theta;
  }
  return f;
}

Vector transfer(const TaylorHoodSpace& reference, const Vector& field, const TaylorHoodSpace& space,
                std::vector<char>* node_outside, int* outside) {
  if (field.size() != reference.num_velocity_dofs()) throw std::invalid_argument("reference field has wrong length");
  const fem::PointLocator loc(reference.mesh());
  const int n2 = space.num_p2_nodes();
  Vector out(2 * n2);
  if (node_outside) node_outside->assign(n2, 0);
  int count = 0;
  for (int i = 0; i < n2; ++i) {
    const auto hit = loc.locate(space.node_coords()[i]);
    const auto s = fem::sample_velocity(reference, field, hit.tri, hit.bary);
    out[i] = s.value.x();
    out[n2 + i] = s.value.y();
    if (!hit.inside) {
      ++count;
      if (node_outside) (*node_outside)[i] = 1;
    }
  }
  if (outside) *outside = count;
  return out;
}

fem::Norms masked_norms(const TaylorHoodSpace& space, const Vector& field, const std::vector<char>& node_outside) {
  const auto& rule = fem::triangle_rule_deg5();
  double l2 = 0.0, semi = 0.0;
  for (int t = 0; t < space.mesh().num_triangles(); ++t) {
    const auto nodes = space.p2_nodes(t);
    bool skip = false;
    for (int n : nodes) skip = skip || node_outside[n];
    if (skip) continue;
    const double area = std::abs(space.mesh().signed_area(t));
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const auto s = fem::sample_velocity(space, field, t, rule.points[q]);
      l2 += rule.weights[q] * area * s.value.squaredNorm();
      semi += rule.weights[q] * area * s.grad.squaredNorm();
    }
  }
  return fem::Norms{std::sqrt(l2), std::sqrt(semi), std::sqrt(l2 + semi)};
}

FieldEoc field_eoc_vs_reference(const std::vector<FinalFields>& levels, const std::vector<double>& h,
                                const FinalFields& reference) {
  if (levels.size() != h.size()) throw std::invalid_argument("one mesh size per level required");
  FieldEoc out;
  out.tables = {EocTable{"u", h, {}, {}}, EocTable{"v", h, {}, {}}, EocTable{"theta", h, {}, {}}};
  for (const auto& lv : levels) {
    std::vector<char> mask;
    int flagged = 0;
    const Vector* mine[3] = {&lv.u, &lv.v, &lv.theta};
    const Vector* ref[3] = {&reference.u, &reference.v, &reference.theta};
    for (int f = 0; f < 3; ++f) {
      const Vector r = transfer(*reference.space, *ref[f], *lv.space, &mask, &flagged);
      const auto n = masked_norms(*lv.space, *mine[f] - r, mask);
      out.tables[f].l2.push_back(n.l2);
      out.tables[f].h1.push_back(n.h1);
    }
    out.flagged.push_back(flagged);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<SweepRow> l0_sweep(const OptConfig& c, const std::vector<double>& l0_list,
                               const optimizer::ProgressFn& progress) {
  std::vector<SweepRow> rows(l0_list.size());
  parallel_for(static_cast<int>(l0_list.size()), [&](int i) {
    OptConfig ci = c;
    ci.method = shape::Method::AugLag;
    ci.ell0 = l0_list[i];
    SweepRow& row = rows[i];
    row.l0 = l0_list[i];
    try {
      const auto r = optimizer::run_optimization(ci, worker_count() > 1 ? optimizer::ProgressFn{} : progress);
      row.volume_variation = r.trace.rows.front().volume - r.trace.rows.back().volume;
      row.final_G = r.trace.rows.back().G;
      row.iterations = static_cast<int>(r.trace.rows.size()) - 1;
      row.status = optimizer::to_string(r.status);
      row.ok = r.status != optimizer::Status::Stalled;
    } catch (const std::exception& e) {
      row.volume_variation = row.final_G = std::numeric_limits<double>::quiet_NaN();
      row.status = std::string("error: ") + e.what();
      row.ok = false;
    }
  });
  return rows;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "l0,volume_variation,final_G,iterations,status\n";
  for (const auto& r : rows)
    f << num(r.l0) << ',' << num(r.volume_variation) << ',' << num(r.final_G) << ',' << r.iterations << ','
      << quote(r.status) << '\n';
}

std::vector<SweepRow> read_sweep_csv(const std::string& path) {
  std::vector<SweepRow> out;
  for (const auto& row : read_csv(path, "l0,volume_variation,final_G,iterations,status")) {
    if (row.size() != 5) throw std::runtime_error(path + ": malformed row");
    SweepRow r{std::stod(row[0]), std::stod(row[1]), std::stod(row[2]), std::stoi(row[3]), row[4], false};
    r.ok = r.status.rfind("error", 0) != 0 && r.status != "stalled";
    out.push_back(r);
  }
  return out;
}

std::optional<double> sign_change(const std::vector<SweepRow>& rows) {
  std::vector<SweepRow> ok;
  for (const auto& r : rows)
    if (r.ok && std::isfinite(r.volume_variation)) ok.push_back(r);
  std::sort(ok.begin(), ok.end(), [](const SweepRow& a, const SweepRow& b) { return a.l0 < b.l0; });
  for (size_t k = 1; k < ok.size(); ++k) {
    const double a = ok[k - 1].volume_variation, b = ok[k].volume_variation;
    if (a == 0.0) return ok[k - 1].l0;
    if ((a < 0.0) != (b < 0.0) || b == 0.0) return ok[k - 1].l0 + (ok[k].l0 - ok[k - 1].l0) * a / (a - b);
  }
  return std::nullopt;
}

std::string format_sweep_summary(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "  " << std::setw(8) << "l0" << std::setw(16) << "vol.variation" << std::setw(14) << "final G" << std::setw(7)
     << "iters" << "  status\n";
  for (const auto& r : rows) {
    std::ostringstream l0;
    l0 << std::fixed << std::setprecision(2) << r.l0;
    os << "  " << std::setw(8) << l0.str() << std::setw(16) << sci(r.volume_variation) << std::setw(14)
       << sci(r.final_G) << std::setw(7) << r.iterations << "  " << r.status << '\n';
  }
  const auto sc = sign_change(rows);
  os << "  sign change: " << (sc ? opt_fmt(sc, 2) : std::string("none")) << '\n';
  return os.str();
}

Calibration calibrate_gamma(const OptConfig& c, double target) {
  const auto it = optimizer::evaluate(mesh::generate_channel_mesh(c.rect, c.center, c.radius, c.h), c);
  Calibration cal;
  cal.perimeter = it.obj.P;
  cal.vort2 = it.obj.vort2;
  cal.target = target;
  if (!(cal.vort2 > 0.0)) throw std::runtime_error("flow has no vorticity; gamma cannot be calibrated");
  cal.gamma = 2.0 * (c.alpha * cal.perimeter - target) / cal.vort2;
  return cal;
}

}  // namespace vortishape::harness
