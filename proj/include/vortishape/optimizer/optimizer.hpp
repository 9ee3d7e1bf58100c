#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vortishape/flow/flow.hpp"
#include "vortishape/mesh/mesh.hpp"
#include "vortishape/shape/shape.hpp"

namespace vortishape::optimizer {

using fem::TaylorHoodSpace;
using fem::Vector;
using mesh::Mesh;
using mesh::Vec2;
using shape::Method;

struct OptConfig {
  // flow
  double nu = 0.01;
  double amplitude = 1.2;
  mesh::Rect rect{};
  // initial obstacle and mesh
  Vec2 center{0.325, 0.0};
  double radius = 0.13;
  double h = 1.0 / 60;
  // objective
  double alpha = 7.0;
  double gamma = 1.0;
  // smoothing of extensions and deformation fields
  double eps = 1e-2;
  double eps1 = 1e-2;
  double eps2 = 1e-4;
  double eps3 = 1e-3;
  // step size
  double sigma1 = 0.5;
  double sigma2 = 0.5;
  int j_max = 15;
  double min_angle_gate = 2.0;  // degrees, on the moved mesh before smoothing
  double regen_angle = 10.0;    // regenerate when smoothing cannot reach this
  int smooth_sweeps = 5;
  // augmented Lagrangian
  double ell0 = 54.0;
  double b0 = 10.0;
  double tau = 2.0;
  double b_bar = 100.0;
  /// Target volume. NaN means the volume of the initial mesh.
  double m = std::numeric_limits<double>::quiet_NaN();
  // loop
  Method method = Method::AugLag;
  double tol = 1e-4;
  int max_outer = 200;
  flow::NewtonOptions newton{};

  /// Throws std::invalid_argument naming the first offending key.
  void validate() const;
  flow::FlowProblem flow_problem() const;
};

/// Reads a sectioned `key = value` file; absent keys keep their defaults.
OptConfig load_config(const std::string& path);
OptConfig parse_config(const std::string& text);
/// Same format, every key written.
std::string format_config(const OptConfig& c);

struct Objective {
  double G = 0.0;  // alpha P - gamma/2 ||curl u||^2
  double P = 0.0;
  double J = 0.0;  // -gamma/2 ||curl u||^2
  double vort2 = 0.0;
};
Objective objective(const TaylorHoodSpace& space, const Vector& u, double alpha, double gamma);

/// Merit G + ell F + b/2 F^2 with F = vol - m.
double lagrangian(double G, double ell, double b, double vol, double m);

/// ell' = ell + b (vol - m); b' = tau b while b < b_bar.
std::pair<double, double> auglag_update(double ell, double b, double vol, double m, double tau, double b_bar);

/// A mesh with its solved state.
struct Iterate {
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const TaylorHoodSpace> space;
  flow::FlowState state;
  flow::NewtonReport newton;
  Objective obj;
  double volume = 0.0;
  double min_angle = 0.0;
};

/// Solves the flow on `m`, warm-starting from `warm` when the layouts match.
/// Throws std::runtime_error when Newton does not converge.
Iterate evaluate(const Mesh& m, const OptConfig& c, const flow::FlowState* warm = nullptr);

struct LineSearchResult {
  bool accepted = false;
  double t = 0.0;
  int j = -1;
  bool regenerated = false;
  Iterate next;
};

/// Tries t_j = sigma2^j sigma1 |G_k| / ||theta||^2 for j = 0..j_max and
/// keeps the first candidate that is not degenerate and lowers `merit`.
/// Candidates are smoothed and, if still poor, regenerated from their
/// obstacle polygon before evaluation.
LineSearchResult line_search(const Iterate& current, const Vector& theta, const OptConfig& c,
                             const std::function<double(const Iterate&)>& merit);

enum class Status { Converged, MaxIterations, Stalled };
std::string to_string(Status s);

struct TraceRow {
  int iter = 0;
  double G = 0.0;
  double L = 0.0;
  double volume = 0.0;
  double perimeter = 0.0;
  double vort2 = 0.0;
  double t = 0.0;
  int j = -1;
  double ell = 0.0;
  double b = 0.0;
  double min_angle = 0.0;
};

struct OptTrace {
  std::vector<TraceRow> rows;
  std::vector<std::vector<Vec2>> polylines;  // obstacle boundary per row
};

struct OptResult {
  Iterate final;
  OptTrace trace;
  Status status = Status::MaxIterations;
  std::string message;
  double target_volume = 0.0;
  int regenerations = 0;
};

using ProgressFn = std::function<void(const TraceRow&)>;

/// Steps 1-4 of the descent loop until |G_{k+1} - G_k| < tol.
OptResult run_optimization(const OptConfig& c, const ProgressFn& progress = {}, const Mesh* initial = nullptr);

/// `iter,G,L,volume,perimeter,vort2,t,j,ell,b,min_angle`.
void write_trace_csv(const std::string& path, const OptTrace& trace);
std::vector<TraceRow> read_trace_csv(const std::string& path);
/// boundary_0000.csv, boundary_0001.csv, ... in `dir`.
void write_polylines(const std::string& dir, const OptTrace& trace);

}  // namespace vortishape::optimizer
