// Command line front end: solve, optimize, verify, study, calibrate-gamma.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "vortishape/adjoint/adjoint.hpp"
#include "vortishape/harness/harness.hpp"
#include "vortishape/mesh/mesh_io.hpp"

#ifndef VORTISHAPE_VERSION
#define VORTISHAPE_VERSION "dev"
#endif

namespace fs = std::filesystem;
using namespace vortishape;
using mesh::Vec2;
using optimizer::OptConfig;

namespace {

enum Exit { kOk = 0, kConfig = 1, kState = 2, kStalled = 3, kVerify = 4 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

/// Config snapshot, timings and the list of files a run produced.
class RunManifest {
 public:
  RunManifest(std::string command, fs::path dir) : command_(std::move(command)), dir_(std::move(dir)) {
    start_ = timestamp();
  }
  void set(const std::string& key, const std::string& value) { extra_.emplace_back(key, value); }
  void add_file(const fs::path& p) { files_.push_back(fs::relative(p, dir_).string()); }

  void write(const OptConfig& c, const std::string& status, int code) {
    const fs::path snapshot = dir_ / "config.ini";
    write_text(snapshot, optimizer::format_config(c));
    add_file(snapshot);
    std::ostringstream os;
    os << "tool = vortishape\n";
    os << "version = " << VORTISHAPE_VERSION << "\n";
    os << "command = " << command_ << "\n";
    for (const auto& [k, v] : extra_) os << k << " = " << v << "\n";
    os << "start = " << start_ << "\n";
    os << "end = " << timestamp() << "\n";
    os << "status = " << status << "\n";
    os << "exit_code = " << code << "\n";
    std::string list;
    for (const auto& f : files_)
      if (fs::exists(dir_ / f)) list += (list.empty() ? "" : ",") + f;
    os << "files = " << list << "\n";
    // written under a temporary name and renamed so readers never see half a file
    const fs::path tmp = dir_ / "manifest.txt.tmp";
    write_text(tmp, os.str());
    fs::rename(tmp, dir_ / "manifest.txt");
  }

  static void write_text(const fs::path& p, const std::string& text) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << text;
  }

 private:
  std::string command_;
  fs::path dir_;
  std::string start_;
  std::vector<std::pair<std::string, std::string>> extra_;
  std::vector<std::string> files_;
};

struct Common {
  std::string config;
  std::string method;
  std::string out = "out";
  std::string mesh;
};

OptConfig load(const Common& o) {
  OptConfig c;
  try {
    if (!o.config.empty()) c = optimizer::load_config(o.config);
    if (!o.method.empty()) {
      const shape::Method m = shape::method_from_string(o.method);
      if (!o.config.empty() && m != c.method)
        std::cerr << "warning: --method " << o.method << " overrides optimizer.method = "
                  << shape::to_string(c.method) << " from " << o.config << "\n";
      c.method = m;
    }
    c.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return c;
}

mesh::Mesh initial_mesh(const Common& o, const OptConfig& c) {
  try {
    if (o.mesh.empty()) return mesh::generate_channel_mesh(c.rect, c.center, c.radius, c.h);
    if (fs::path(o.mesh).extension() == ".msh") return mesh::load_gmsh(o.mesh, mesh::default_gmsh_tags(), c.h);
    return mesh::load_mesh(o.mesh, c.h);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("mesh: ") + e.what());
  }
}

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  return fs::path(dir);
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3) << v;
  return os.str();
}

std::vector<double> level_sizes(int levels) {
  std::vector<double> h;
  for (int k = 0; k < levels; ++k) h.push_back(1.0 / (10.0 * std::pow(2.0, k)));
  return h;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (item.empty() || used != item.size()) throw ConfigError("--l0: not a number: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("--l0: empty list");
  return out;
}

void print_row(const optimizer::TraceRow& r) {
  std::cout << std::setw(4) << r.iter << "  G=" << std::setw(10) << fmt(r.G) << "  L=" << std::setw(10) << fmt(r.L)
            << "  vol=" << fmt(r.volume, 7) << "  t=" << sci(r.t) << "  j=" << r.j << "  ell=" << fmt(r.ell, 5)
            << "  b=" << r.b << "  angle=" << fmt(r.min_angle, 3) << std::endl;
}

// ---------------------------------------------------------------------------

int cmd_solve(const Common& o) {
  const OptConfig c = load(o);
  const mesh::Mesh m = initial_mesh(o, c);
  const fs::path dir = prepare_out(o.out);
  RunManifest man("solve", dir);
  const fem::TaylorHoodSpace s(m);
  const auto [st, rep] = flow::solve_navier_stokes(s, c.flow_problem(), c.newton);
  flow::write_newton_csv((dir / "newton.csv").string(), rep);
  man.add_file(dir / "newton.csv");
  fem::write_vtk((dir / "solution.vtk").string(), s, {{"velocity", st.u, true}, {"pressure", st.p, false}});
  man.add_file(dir / "solution.vtk");
  std::cout << "Newton: " << rep.iterations << " iterations, final residual " << sci(rep.final_residual)
            << (rep.converged ? ", converged" : ", NOT converged") << "\n";
  man.set("vertices", std::to_string(m.num_vertices()));
  man.set("newton_iterations", std::to_string(rep.iterations));
  const int code = rep.converged ? kOk : kState;
  man.write(c, rep.converged ? "converged" : "not_converged", code);
  return code;
}

int cmd_optimize(const Common& o) {
  const OptConfig c = load(o);
  const mesh::Mesh m = initial_mesh(o, c);
  const fs::path dir = prepare_out(o.out);
  RunManifest man("optimize", dir);
  man.set("method", shape::to_string(c.method));
  optimizer::OptResult r;
  try {
    r = optimizer::run_optimization(c, print_row, &m);
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    man.write(c, "error", kState);
    return kState;
  }
  optimizer::write_trace_csv((dir / "trace.csv").string(), r.trace);
  man.add_file(dir / "trace.csv");
  optimizer::write_polylines((dir / "boundary").string(), r.trace);
  for (size_t k = 0; k < r.trace.polylines.size(); ++k) {
    std::ostringstream name;
    name << "boundary_" << std::setw(4) << std::setfill('0') << k << ".csv";
    man.add_file(dir / "boundary" / name.str());
  }
  const auto& s = *r.final.space;
  fem::write_vtk((dir / "final.vtk").string(), s,
                 {{"velocity", r.final.state.u, true}, {"pressure", r.final.state.p, false}});
  man.add_file(dir / "final.vtk");
  mesh::save_mesh((dir / "final.mesh").string(), *r.final.mesh);
  man.add_file(dir / "final.mesh");

  const auto& first = r.trace.rows.front();
  const auto& last = r.trace.rows.back();
  std::cout << optimizer::to_string(r.status) << " after " << r.trace.rows.size() - 1 << " iterations: G "
            << fmt(first.G) << " -> " << fmt(last.G) << ", volume " << fmt(first.volume, 7) << " -> "
            << fmt(last.volume, 7) << " (" << fmt(100.0 * (last.volume - r.target_volume) / r.target_volume, 4)
            << " % from target)\n";
  if (!r.message.empty()) std::cout << r.message << "\n";
  man.set("iterations", std::to_string(r.trace.rows.size() - 1));
  man.set("regenerations", std::to_string(r.regenerations));
  man.set("final_G", fmt(last.G, 10));
  man.set("final_volume", fmt(last.volume, 10));
  const int code = r.status == optimizer::Status::Stalled ? kStalled : kOk;
  man.write(c, optimizer::to_string(r.status), code);
  return code;
}

// ---------------------------------------------------------------------------

struct CheckLine {
  std::string name;
  std::string value;
  bool pass;
};

int report(const std::vector<CheckLine>& lines, const fs::path& path) {
  bool all = true;
  std::ofstream f(path);
  f << "check,value,result\n";
  for (const auto& l : lines) {
    std::cout << "  " << std::left << std::setw(44) << l.name << std::setw(26) << l.value << std::right
              << (l.pass ? "pass" : "FAIL") << "\n";
    f << '"' << l.name << "\"," << '"' << l.value << "\"," << (l.pass ? "pass" : "fail") << "\n";
    all = all && l.pass;
  }
  return all ? kOk : kVerify;
}

double curvature_error(const OptConfig& c, double h) {
  const auto m = mesh::generate_channel_mesh(c.rect, c.center, c.radius, h);
  const fem::TaylorHoodSpace s(m);
  const auto ext = shape::extend_normal(s, c.eps3);
  double worst = 0.0;
  for (double k : ext.kappa) worst = std::max(worst, std::abs(std::abs(k) * c.radius - 1.0));
  return worst;
}

std::vector<CheckLine> verify_curvature(const OptConfig& c) {
  const double e1 = curvature_error(c, c.h), e2 = curvature_error(c, c.h / 2);
  return {{"max |kappa r - 1| at h", fmt(e1, 4), e1 <= 0.05},
          {"max |kappa r - 1| at h/2", fmt(e2, 4), e2 < e1},
          {"observed order", fmt(std::log2(e1 / e2), 3), std::log2(e1 / e2) >= 1.0}};
}

std::vector<CheckLine> verify_newton(const OptConfig& c, const mesh::Mesh& m) {
  const fem::TaylorHoodSpace s(m);
  const auto [st, rep] = flow::solve_navier_stokes(s, c.flow_problem(), c.newton);
  bool contracts = true;
  for (size_t k = 2; k < rep.increments.size(); ++k)
    if (rep.increments[k - 1] > 0.0 && rep.increments[k] / rep.increments[k - 1] >= 1.0) contracts = false;
  for (size_t k = 0; k < rep.increments.size(); ++k)
    std::cout << "  iter " << k + 1 << "  increment " << sci(rep.increments[k]) << "  residual "
              << sci(rep.residuals[k]) << "\n";
  return {{"converged", rep.converged ? "yes" : "no", rep.converged},
          {"iterations <= 15", std::to_string(rep.iterations), rep.iterations <= 15},
          {"increments contract after iteration 2", contracts ? "yes" : "no", contracts}};
}

std::vector<CheckLine> verify_gradient(const OptConfig& c, const mesh::Mesh& m, const std::string& field) {
  std::vector<std::pair<std::string, std::function<Vec2(const Vec2&)>>> fields;
  if (field == "zero") fields.push_back({"zero", [](const Vec2&) { return Vec2(0, 0); }});
  if (field == "translation" || field == "all") fields.push_back({"translation", harness::translation_field(c, {1, 0})});
  if (field == "stretch" || field == "all") fields.push_back({"stretch", harness::stretch_field(c)});
  if (fields.empty()) throw ConfigError("--field must be all, translation, stretch or zero");
  std::vector<CheckLine> out;
  for (const auto& [name, f] : fields) {
    const auto r = harness::fd_gradient_check(c, f, {1e-2, 1e-3, 1e-4}, &m);
    std::cout << "  " << name << ": dG.theta = " << fmt(r.derivative, 8) << "\n";
    std::vector<double> err;
    for (size_t k = 0; k < r.t.size(); ++k) {
      const double diff = std::abs(r.derivative - r.quotient[k]);
      err.push_back(diff <= 1e-8 ? 0.0 : diff / std::abs(r.quotient[k]));
      std::cout << "    t=" << sci(r.t[k]) << "  quotient " << fmt(r.quotient[k], 8) << "  rel.error " << sci(err.back())
                << "\n";
    }
    out.push_back({name + ": rel. error at t=1e-4", sci(err.back()), err.back() <= 0.05});
    out.push_back({name + ": error decreases 1e-2 -> 1e-4", sci(err.front()) + " -> " + sci(err.back()),
                   err.back() < err.front() || err.back() == 0.0});
  }
  return out;
}

int cmd_verify(const Common& o, bool gradient, bool newton, bool curvature, const std::string& field) {
  if (int(gradient) + int(newton) + int(curvature) != 1)
    throw ConfigError("choose exactly one of --gradient, --newton, --curvature");
  const OptConfig c = load(o);
  const fs::path dir = prepare_out(o.out);
  RunManifest man("verify", dir);
  std::vector<CheckLine> lines;
  std::string name;
  if (curvature) {
    name = "curvature";
    lines = verify_curvature(c);
  } else {
    const mesh::Mesh m = initial_mesh(o, c);
    name = newton ? "newton" : "gradient";
    lines = newton ? verify_newton(c, m) : verify_gradient(c, m, field);
  }
  man.set("check", name);
  const fs::path path = dir / ("verify_" + name + ".csv");
  const int code = report(lines, path);
  man.add_file(path);
  man.write(c, code == kOk ? "pass" : "fail", code);
  return code;
}

// ---------------------------------------------------------------------------

void print_progress_level(double h) { std::cout << "  level h = 1/" << std::lround(1.0 / h) << "\n" << std::flush; }

int cmd_study(const Common& o, bool eoc, bool hausdorff, bool sweep, int levels, const std::string& l0,
              double reference_h) {
  if (int(eoc) + int(hausdorff) + int(sweep) != 1)
    throw ConfigError("choose exactly one of --eoc, --hausdorff, --l0-sweep");
  const OptConfig c = load(o);
  if ((eoc || hausdorff) && levels < 3)
    throw ConfigError("need at least 3 levels, got " + std::to_string(levels));
  const fs::path dir = prepare_out(o.out);
  RunManifest man("study", dir);
  man.set("threads", std::to_string(harness::worker_count()));
  int code = kOk;

  if (eoc) {
    man.set("study", "eoc");
    const auto tables = harness::manufactured_flow_eoc(level_sizes(levels));
    harness::write_eoc_csv((dir / "study_eoc.csv").string(), tables);
    man.add_file(dir / "study_eoc.csv");
    std::cout << harness::format_eoc_summary(tables);
  } else if (hausdorff) {
    man.set("study", "hausdorff");
    man.set("method", shape::to_string(c.method));
    const auto h = level_sizes(levels);
    std::cout << "reference run at h = 1/" << std::lround(1.0 / reference_h) << "\n" << std::flush;
    const auto ref = harness::run_levels(c, {reference_h});
    if (!ref[0].ok) throw std::runtime_error("reference run failed: " + ref[0].error);
    const auto runs = harness::run_levels(c, h);
    const auto& ref_poly = ref[0].result.trace.polylines.back();
    const auto rows = harness::hausdorff_table(runs, ref_poly);
    harness::write_hausdorff_csv((dir / "study_hausdorff.csv").string(), rows);
    man.add_file(dir / "study_hausdorff.csv");
    mesh::write_polyline_csv((dir / "reference_boundary.csv").string(), ref_poly);
    man.add_file(dir / "reference_boundary.csv");
    std::cout << harness::format_hausdorff_summary(rows);

    std::vector<harness::FinalFields> fields;
    std::vector<double> ok_h;
    for (const auto& r : runs)
      if (r.ok) {
        fields.push_back(harness::final_fields(c, r.result));
        ok_h.push_back(r.h);
      }
    const auto fe = harness::field_eoc_vs_reference(fields, ok_h, harness::final_fields(c, ref[0].result));
    harness::write_eoc_csv((dir / "study_field_eoc.csv").string(), fe.tables);
    man.add_file(dir / "study_field_eoc.csv");
    std::cout << harness::format_eoc_summary(fe.tables);
    for (size_t k = 0; k < fe.flagged.size(); ++k)
      std::cout << "  h = 1/" << std::lround(1.0 / ok_h[k]) << ": " << fe.flagged[k]
                << " nodes outside the reference domain (nearest-triangle values, excluded from norms)\n";
    size_t good = 0;
    for (const auto& r : runs) good += r.ok;
    if (5 * good < 4 * runs.size()) code = kState;
  } else {
    man.set("study", "l0_sweep");
    std::vector<double> list;
    if (l0.empty()) {
      for (int v = 16; v <= 56; v += 4) list.push_back(v);
      list.push_back(54);
      list.push_back(55);
      std::sort(list.begin(), list.end());
    } else {
      list = parse_list(l0);
    }
    const auto rows = harness::l0_sweep(c, list);
    harness::write_sweep_csv((dir / "study_l0_sweep.csv").string(), rows);
    man.add_file(dir / "study_l0_sweep.csv");
    std::cout << harness::format_sweep_summary(rows);
    size_t good = 0;
    for (const auto& r : rows) good += r.ok;
    if (5 * good < 4 * rows.size()) code = kState;
  }
  man.write(c, code == kOk ? "ok" : "failed_rows", code);
  return code;
}

int cmd_calibrate(const Common& o, double target) {
  OptConfig c = load(o);
  const fs::path dir = prepare_out(o.out);
  RunManifest man("calibrate-gamma", dir);
  const auto cal = harness::calibrate_gamma(c, target);
  std::cout << "perimeter " << fmt(cal.perimeter, 8) << ", ||curl u||^2 " << fmt(cal.vort2, 8) << "\n";
  std::cout << "gamma = " << fmt(cal.gamma, 8) << " gives G = " << fmt(target) << "\n";
  c.gamma = cal.gamma;
  RunManifest::write_text(dir / "calibrated.ini", optimizer::format_config(c));
  man.add_file(dir / "calibrated.ini");
  man.set("gamma", fmt(cal.gamma, 10));
  man.write(c, "ok", kOk);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shape optimization of an obstacle for maximal vorticity in stationary Navier-Stokes flow"};
  app.set_version_flag("--version", VORTISHAPE_VERSION);
  app.require_subcommand(1);
  Common o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "config file (sectioned key = value)");
    sub->add_option("--method", o.method, "auglag or divfree (overrides the config)");
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--mesh", o.mesh, "initial mesh (.msh from Gmsh or native format) instead of generating one");
  };

  auto* solve = app.add_subcommand("solve", "solve the flow on the initial geometry");
  common(solve);
  auto* optimize = app.add_subcommand("optimize", "run the shape optimization");
  common(optimize);

  auto* verify = app.add_subcommand("verify", "run one numerical check");
  common(verify);
  bool v_grad = false, v_newton = false, v_curv = false;
  std::string field = "all";
  verify->add_flag("--gradient", v_grad, "shape gradient against finite differences");
  verify->add_flag("--newton", v_newton, "Newton convergence on the configured problem");
  verify->add_flag("--curvature", v_curv, "curvature of the initial circle");
  verify->add_option("--field", field, "gradient test field: all, translation, stretch, zero")->capture_default_str();

  auto* study = app.add_subcommand("study", "convergence studies and the multiplier sweep");
  common(study);
  bool s_eoc = false, s_haus = false, s_sweep = false;
  int levels = 3;
  std::string l0;
  double reference_h = 1.0 / 160;
  study->add_flag("--eoc", s_eoc, "manufactured-solution EOC on the empty channel");
  study->add_flag("--hausdorff", s_haus, "boundary distance and field EOC against a fine reference run");
  study->add_flag("--l0-sweep", s_sweep, "final volume variation as a function of the initial multiplier");
  study->add_option("--levels", levels, "number of mesh levels h = 1/10, 1/20, ...")->capture_default_str();
  study->add_option("--l0", l0, "comma separated initial multipliers");
  study->add_option("--reference-h", reference_h, "mesh size of the reference run")->capture_default_str();

  auto* calib = app.add_subcommand("calibrate-gamma", "pick gamma so that G on the initial mesh hits a target");
  common(calib);
  double target = 0.949;
  calib->add_option("--target", target, "target objective value")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*solve) return cmd_solve(o);
    if (*optimize) return cmd_optimize(o);
    if (*verify) return cmd_verify(o, v_grad, v_newton, v_curv, field);
    if (*study) return cmd_study(o, s_eoc, s_haus, s_sweep, levels, l0, reference_h);
    if (*calib) return cmd_calibrate(o, target);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kState;
  }
  return kConfig;
}
