#include "vortishape/optimizer/optimizer.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

#include "vortishape/adjoint/adjoint.hpp"
#include "vortishape/fem/fields.hpp"
#include "vortishape/mesh/mesh_io.hpp"

namespace vortishape::optimizer {

namespace pt = boost::property_tree;

namespace {

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw std::invalid_argument("config key '" + key + "' " + what);
}

// Accepts plain numbers, "inf" and fractions such as 1/60.
double parse_number(const std::string& key, std::string s) {
  s.erase(0, s.find_first_not_of(" \t"));
  s.erase(s.find_last_not_of(" \t") + 1);
  try {
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    const auto slash = s.find('/');
    size_t used = 0;
    if (slash != std::string::npos) {
      const double a = std::stod(s.substr(0, slash), &used);
      if (used != slash) throw std::invalid_argument("");
      const std::string rest = s.substr(slash + 1);
      const double b = std::stod(rest, &used);
      if (used != rest.size()) throw std::invalid_argument("");
      return a / b;
    }
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::logic_error&) {
    throw std::invalid_argument("config key '" + key + "' is not a number: '" + s + "'");
  }
}

std::string fmt(double v) {
  if (std::isinf(v)) return "inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

void OptConfig::validate() const {
  require(nu > 0.0, "flow.nu", "must be positive");
  require(std::isfinite(amplitude), "flow.amplitude", "must be finite");
  require(rect.hi.x() > rect.lo.x() && rect.hi.y() > rect.lo.y(), "geometry.x1/y1", "must exceed x0/y0");
  require(radius > 0.0, "geometry.radius", "must be positive");
  require(h > 0.0 && h < 1.0, "geometry.h", "must lie in (0, 1)");
  require(alpha > 0.0, "objective.alpha", "must be positive");
  require(gamma > 0.0, "objective.gamma", "must be positive");
  require(eps > 0.0, "smoothing.eps", "must be positive");
  require(eps1 > 0.0, "smoothing.eps1", "must be positive");
  require(eps2 > 0.0, "smoothing.eps2", "must be positive");
  require(eps3 > 0.0, "smoothing.eps3", "must be positive");
  require(sigma1 > 0.0 && sigma1 < 1.0, "line_search.sigma1", "must lie in (0, 1)");
  require(sigma2 > 0.0 && sigma2 < 1.0, "line_search.sigma2", "must lie in (0, 1)");
  require(j_max >= 0, "line_search.j_max", "must be non-negative");
  require(min_angle_gate >= 0.0 && min_angle_gate < 60.0, "line_search.min_angle_gate", "must lie in [0, 60)");
  require(regen_angle >= 0.0 && regen_angle < 60.0, "line_search.regen_angle", "must lie in [0, 60)");
  require(smooth_sweeps >= 0, "line_search.smooth_sweeps", "must be non-negative");
  require(std::isfinite(ell0), "auglag.ell0", "must be finite");
  require(std::isfinite(b0) && b0 >= 0.0, "auglag.b0", "must be non-negative");
  require(tau > 1.0, "auglag.tau", "must exceed 1");
  require(b_bar > 0.0, "auglag.b_bar", "must be positive");
  require(std::isnan(m) || m > 0.0, "auglag.m", "must be positive");
  require(tol > 0.0, "optimizer.tol", "must be positive");
  require(max_outer >= 0, "optimizer.max_outer", "must be non-negative");
  require(newton.tol > 0.0, "newton.tol", "must be positive");
  require(newton.max_iter >= 0, "newton.max_iter", "must be non-negative");
}

flow::FlowProblem OptConfig::flow_problem() const { return flow::channel_problem(rect, nu, amplitude); }

OptConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument("config parse error at line " + std::to_string(e.line()) + ": " + e.message());
  }
  OptConfig c;
  std::set<std::string> seen;
  auto num = [&](const std::string& key, double& out) {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'))) out = parse_number(key, *v);
    seen.insert(key);
  };
  auto integer = [&](const std::string& key, int& out) {
    double v = out;
    num(key, v);
    require(std::floor(v) == v && std::abs(v) < 1e9, key, "must be an integer");
    out = static_cast<int>(v);
  };
  num("flow.nu", c.nu);
  num("flow.amplitude", c.amplitude);
  num("geometry.x0", c.rect.lo.x());
  num("geometry.y0", c.rect.lo.y());
  num("geometry.x1", c.rect.hi.x());
  num("geometry.y1", c.rect.hi.y());
  num("geometry.center_x", c.center.x());
  num("geometry.center_y", c.center.y());
  num("geometry.radius", c.radius);
  num("geometry.h", c.h);
  num("objective.alpha", c.alpha);
  num("objective.gamma", c.gamma);
  num("smoothing.eps", c.eps);
  num("smoothing.eps1", c.eps1);
  num("smoothing.eps2", c.eps2);
  num("smoothing.eps3", c.eps3);
  num("line_search.sigma1", c.sigma1);
  num("line_search.sigma2", c.sigma2);
  integer("line_search.j_max", c.j_max);
  num("line_search.min_angle_gate", c.min_angle_gate);
  num("line_search.regen_angle", c.regen_angle);
  integer("line_search.smooth_sweeps", c.smooth_sweeps);
  num("auglag.ell0", c.ell0);
  num("auglag.b0", c.b0);
  num("auglag.tau", c.tau);
  num("auglag.b_bar", c.b_bar);
  if (auto v = tree.get_optional<std::string>(pt::ptree::path_type("auglag.m", '.'))) {
    if (*v != "initial") c.m = parse_number("auglag.m", *v);
  }
  seen.insert("auglag.m");
  if (auto v = tree.get_optional<std::string>(pt::ptree::path_type("optimizer.method", '.'))) {
    try {
      c.method = shape::method_from_string(*v);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config key 'optimizer.method': " + std::string(e.what()));
    }
  }
  seen.insert("optimizer.method");
  num("optimizer.tol", c.tol);
  integer("optimizer.max_outer", c.max_outer);
  num("newton.tol", c.newton.tol);
  integer("newton.max_iter", c.newton.max_iter);

  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw std::invalid_argument("config key '" + section + "' must be inside a section");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      if (!seen.count(full)) throw std::invalid_argument("unknown config key '" + full + "'");
    }
  }
  c.validate();
  return c;
}

OptConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const OptConfig& c) {
  std::ostringstream os;
  os << "[flow]\nnu = " << fmt(c.nu) << "\namplitude = " << fmt(c.amplitude) << "\n\n";
  os << "[geometry]\nx0 = " << fmt(c.rect.lo.x()) << "\ny0 = " << fmt(c.rect.lo.y()) << "\nx1 = " << fmt(c.rect.hi.x())
     << "\ny1 = " << fmt(c.rect.hi.y()) << "\ncenter_x = " << fmt(c.center.x()) << "\ncenter_y = " << fmt(c.center.y())
     << "\nradius = " << fmt(c.radius) << "\nh = " << fmt(c.h) << "\n\n";
  os << "[objective]\nalpha = " << fmt(c.alpha) << "\ngamma = " << fmt(c.gamma) << "\n\n";
  os << "[smoothing]\neps = " << fmt(c.eps) << "\neps1 = " << fmt(c.eps1) << "\neps2 = " << fmt(c.eps2)
     << "\neps3 = " << fmt(c.eps3) << "\n\n";
  os << "[line_search]\nsigma1 = " << fmt(c.sigma1) << "\nsigma2 = " << fmt(c.sigma2) << "\nj_max = " << c.j_max
     << "\nmin_angle_gate = " << fmt(c.min_angle_gate) << "\nregen_angle = " << fmt(c.regen_angle)
     << "\nsmooth_sweeps = " << c.smooth_sweeps << "\n\n";
  os << "[auglag]\nell0 = " << fmt(c.ell0) << "\nb0 = " << fmt(c.b0) << "\ntau = " << fmt(c.tau)
     << "\nb_bar = " << fmt(c.b_bar) << "\nm = " << (std::isnan(c.m) ? std::string("initial") : fmt(c.m)) << "\n\n";
  os << "[optimizer]\nmethod = " << shape::to_string(c.method) << "\ntol = " << fmt(c.tol)
     << "\nmax_outer = " << c.max_outer << "\n\n";
  os << "[newton]\ntol = " << fmt(c.newton.tol) << "\nmax_iter = " << c.newton.max_iter << "\n";
  return os.str();
}

Objective objective(const TaylorHoodSpace& space, const Vector& u, double alpha, double gamma) {
  Objective o;
  o.P = mesh::perimeter(space.mesh(), mesh::BoundaryTag::Free);
  o.vort2 = fem::vorticity_squared(space, u);
  o.J = -0.5 * gamma * o.vort2;
  o.G = alpha * o.P + o.J;
  return o;
}

double lagrangian(double G, double ell, double b, double vol, double m) {
  const double f = vol - m;
  return G + ell * f + 0.5 * b * f * f;
}

std::pair<double, double> auglag_update(double ell, double b, double vol, double m, double tau, double b_bar) {
  return {ell + b * (vol - m), b < b_bar ? tau * b : b};
}

Iterate evaluate(const Mesh& m, const OptConfig& c, const flow::FlowState* warm) {
  Iterate it;
  it.mesh = std::make_shared<const Mesh>(m);
  it.space = std::make_shared<const TaylorHoodSpace>(it.mesh);
  flow::FlowSolver solver(*it.space, c.flow_problem());
  const bool usable = warm && warm->u.size() == it.space->num_velocity_dofs() &&
                      warm->p.size() == it.space->num_pressure_dofs();
  auto [state, rep] = solver.solve(c.newton, usable ? warm : nullptr);
  if (!rep.converged)
    throw std::runtime_error("Newton did not converge in " + std::to_string(rep.iterations) +
                             " iterations (last increment " +
                             (rep.increments.empty() ? std::string("n/a") : fmt(rep.increments.back())) + ")");
  it.state = std::move(state);
  it.newton = std::move(rep);
  it.obj = objective(*it.space, it.state.u, c.alpha, c.gamma);
  it.volume = mesh::volume(m);
  it.min_angle = mesh::check_mesh(m).min_angle_deg;
  return it;
}

LineSearchResult line_search(const Iterate& current, const Vector& theta, const OptConfig& c,
                             const std::function<double(const Iterate&)>& merit) {
  const double norm2 = shape::boundary_norm_squared(*current.space, theta);
  if (!(norm2 > 0.0)) throw std::invalid_argument("deformation field vanishes on the obstacle");
  const double m0 = merit(current);
  const double scale = c.sigma1 * std::abs(current.obj.G) / norm2;
  const auto disp = shape::vertex_values(*current.space, theta);
  LineSearchResult res;
  for (int j = 0; j <= c.j_max; ++j) {
    const double t = std::pow(c.sigma2, j) * scale;
    const Mesh moved = mesh::move_mesh(*current.mesh, disp, t);
    const auto q = mesh::check_mesh(moved);
    if (q.inverted_count > 0 || q.min_angle_deg < c.min_angle_gate) continue;
    Mesh cand = mesh::smooth_mesh(moved, c.smooth_sweeps);
    bool regenerated = false;
    if (mesh::check_mesh(cand).min_angle_deg < c.regen_angle) {
      try {
        cand = mesh::generate_channel_mesh(c.rect, mesh::boundary_polyline(moved, mesh::BoundaryTag::Free), c.h);
      } catch (const std::exception&) {
        continue;
      }
      regenerated = true;
    }
    Iterate next;
    try {
      next = evaluate(cand, c, regenerated ? nullptr : &current.state);
    } catch (const std::runtime_error&) {
      continue;
    }
    if (merit(next) < m0) {
      res.accepted = true;
      res.t = t;
      res.j = j;
      res.regenerated = regenerated;
      res.next = std::move(next);
      return res;
    }
  }
  return res;
}

std::string to_string(Status s) {
  switch (s) {
    case Status::Converged: return "converged";
    case Status::MaxIterations: return "max_iterations";
    case Status::Stalled: return "stalled";
  }
  return "unknown";
}

OptResult run_optimization(const OptConfig& c, const ProgressFn& progress, const Mesh* initial) {
  c.validate();
  OptResult res;
  Iterate cur;
  try {
    cur = evaluate(initial ? *initial : mesh::generate_channel_mesh(c.rect, c.center, c.radius, c.h), c);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(std::string("initial state: ") + e.what());
  }
  const double m = std::isnan(c.m) ? cur.volume : c.m;
  res.target_volume = m;
  const bool auglag = c.method == Method::AugLag;
  double ell = c.ell0, b = c.b0;

  auto merit_of = [&](double l, double bb) {
    return [&, l, bb](const Iterate& it) { return auglag ? lagrangian(it.obj.G, l, bb, it.volume, m) : it.obj.G; };
  };
  auto record = [&](int iter, const Iterate& it, double t, int j) {
    TraceRow r;
    r.iter = iter;
    r.G = it.obj.G;
    r.L = merit_of(ell, b)(it);
    r.volume = it.volume;
    r.perimeter = it.obj.P;
    r.vort2 = it.obj.vort2;
    r.t = t;
    r.j = j;
    r.ell = auglag ? ell : 0.0;
    r.b = auglag ? b : 0.0;
    r.min_angle = it.min_angle;
    res.trace.rows.push_back(r);
    res.trace.polylines.push_back(mesh::boundary_polyline(*it.mesh, mesh::BoundaryTag::Free));
    if (progress) progress(r);
  };
  record(0, cur, 0.0, -1);

  res.status = Status::MaxIterations;
  // every change is below an infinite tolerance
  if (std::isinf(c.tol)) res.status = Status::Converged;
  for (int k = 0; k < c.max_outer && res.status == Status::MaxIterations; ++k) {
    const auto& space = *cur.space;
    adjoint::AdjointState adj;
    shape::NormalExtension ext;
    try {
      adj = adjoint::solve_adjoint(space, cur.state, c.nu, c.gamma);
      ext = shape::extend_normal(space, c.eps3);
    } catch (const std::exception& e) {
      throw std::runtime_error("iteration " + std::to_string(k + 1) + ": " + e.what());
    }
    const auto grad = shape::shape_gradient(space, cur.state.u, adj.v, ext.kappa, c.alpha, c.gamma, c.nu);
    const shape::DeformationField field =
        auglag ? shape::deformation_robin(space, shape::lagrangian_gradient(grad.grad_g, ell, b, cur.volume, m), c.eps)
               : shape::deformation_divfree(space, grad.grad_g, c.eps1, c.eps2);

    LineSearchResult ls = line_search(cur, field.theta, c, merit_of(ell, b));
    if (!ls.accepted) {
      res.status = Status::Stalled;
      res.message = "line search found no admissible step at iteration " + std::to_string(k + 1);
      break;
    }
    if (ls.regenerated) ++res.regenerations;
    const double g_prev = cur.obj.G;
    const double vol_prev = cur.volume;
    cur = std::move(ls.next);
    record(k + 1, cur, ls.t, ls.j);
    if (auglag) std::tie(ell, b) = auglag_update(ell, b, vol_prev, m, c.tau, c.b_bar);
    if (std::abs(cur.obj.G - g_prev) < c.tol) {
      res.status = Status::Converged;
      break;
    }
  }
  res.final = std::move(cur);
  return res;
}

void write_trace_csv(const std::string& path, const OptTrace& trace) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "iter,G,L,volume,perimeter,vort2,t,j,ell,b,min_angle\n" << std::setprecision(17);
  for (const auto& r : trace.rows)
    f << r.iter << ',' << r.G << ',' << r.L << ',' << r.volume << ',' << r.perimeter << ',' << r.vort2 << ',' << r.t
      << ',' << r.j << ',' << r.ell << ',' << r.b << ',' << r.min_angle << '\n';
}

std::vector<TraceRow> read_trace_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(f, line) || line != "iter,G,L,volume,perimeter,vort2,t,j,ell,b,min_angle")
    throw std::runtime_error(path + ": not a trace file");
  std::vector<TraceRow> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != 11) throw std::runtime_error(path + ": malformed row '" + line + "'");
    TraceRow r;
    r.iter = static_cast<int>(v[0]);
    r.G = v[1];
    r.L = v[2];
    r.volume = v[3];
    r.perimeter = v[4];
    r.vort2 = v[5];
    r.t = v[6];
    r.j = static_cast<int>(v[7]);
    r.ell = v[8];
    r.b = v[9];
    r.min_angle = v[10];
    rows.push_back(r);
  }
  return rows;
}

void write_polylines(const std::string& dir, const OptTrace& trace) {
  std::filesystem::create_directories(dir);
  for (size_t i = 0; i < trace.polylines.size(); ++i) {
    std::ostringstream name;
    name << "boundary_" << std::setw(4) << std::setfill('0') << i << ".csv";
    mesh::write_polyline_csv((std::filesystem::path(dir) / name.str()).string(), trace.polylines[i]);
  }
}

}  // namespace vortishape::optimizer
