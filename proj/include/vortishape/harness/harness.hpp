#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vortishape/fem/assembly.hpp"
#include "vortishape/fem/fields.hpp"
#include "vortishape/optimizer/optimizer.hpp"

namespace vortishape::harness {

using fem::TaylorHoodSpace;
using fem::Vector;
using mesh::Mesh;
using mesh::Vec2;
using optimizer::OptConfig;

/// Worker count from VORTISHAPE_THREADS (default 1, invalid values ignored).
int worker_count();

/// Runs f(0..n-1) on up to worker_count() threads. Results are stored by
/// index, so the outcome does not depend on scheduling.
void parallel_for(int n, const std::function<void(int)>& f);

// ---------------------------------------------------------------------------
// shape gradient against finite differences

struct FdReport {
  double derivative = 0.0;  // integral of grad G (theta.n) over the obstacle
  double g0 = 0.0;
  std::vector<double> t;
  std::vector<double> quotient;  // (G(t) - G(0)) / t
  std::vector<double> rel_error;
  /// Slope of log |q(t) - dG| against log t over the list (NaN if undefined).
  double order = 0.0;
};

/// theta is given as a vertex displacement function; it must vanish on the
/// outer boundary. Uses the config's mesh size, flow and objective data.
FdReport fd_gradient_check(const OptConfig& c, const std::function<Vec2(const Vec2&)>& theta,
                           const std::vector<double>& t_list, const Mesh* mesh = nullptr);

/// Smooth fields for the check: a bump around the initial obstacle that
/// equals 1 on it and vanishes beyond radius + width, times a direction.
std::function<Vec2(const Vec2&)> translation_field(const OptConfig& c, const Vec2& dir, double width = 0.17);
/// Same bump times (x - cx)/r along the flow: front and back move apart.
std::function<Vec2(const Vec2&)> stretch_field(const OptConfig& c, double width = 0.17);

// ---------------------------------------------------------------------------
// convergence tables

/// Errors per level. eoc_k = log(e_{k-1}/e_k) / log(h_{k-1}/h_k), absent
/// when either error is zero.
struct EocTable {
  std::string name;
  std::vector<double> h;
  std::vector<double> l2;
  std::vector<double> h1;  // empty when only L2 is measured
  std::vector<std::optional<double>> eoc_l2() const;
  std::vector<std::optional<double>> eoc_h1() const;
};

std::vector<std::optional<double>> eoc(const std::vector<double>& h, const std::vector<double>& e);

/// Columns `quantity,h,l2,h1,eoc_l2,eoc_h1`, one row per table level.
void write_eoc_csv(const std::string& path, const std::vector<EocTable>& tables);
std::vector<EocTable> read_eoc_csv(const std::string& path);
std::string format_eoc_summary(const std::vector<EocTable>& tables);

/// Smooth manufactured flow on the empty channel, scaled by `amplitude` and
/// shifted by `shift`. Velocity is divergence free.
struct Manufactured {
  double nu = 0.1;
  double k = 1.5;
  double amplitude = 1.0;
  Vec2 shift{0.0, 0.0};

  Vec2 u(const Vec2& x) const;
  Eigen::Matrix2d grad_u(const Vec2& x) const;
  double p(const Vec2& x) const;
  Vec2 forcing(const Vec2& x) const;
  /// -p n + nu du/dn - 1/2 (u.n) u on the right side (n = e_x)
  Vec2 outflow_traction(const Vec2& x) const;
  flow::FlowProblem problem() const;
};

/// Tables "velocity" (L2, H1) and "pressure" (L2). Needs at least 3 levels.
std::vector<EocTable> manufactured_flow_eoc(const std::vector<double>& h_list, const Manufactured& ms = {},
                                            const mesh::Rect& rect = {});

// ---------------------------------------------------------------------------
// optimization studies

struct RunSummary {
  double h = 0.0;
  bool ok = false;
  std::string error;
  optimizer::OptResult result;
};

/// Optimization at each mesh size (in parallel when allowed).
std::vector<RunSummary> run_levels(const OptConfig& c, const std::vector<double>& h_list,
                                   const optimizer::ProgressFn& progress = {});

struct HausdorffRow {
  double h = 0.0;
  double distance = 0.0;
  double volume_variation = 0.0;  // |Omega_0| - |Omega_final|
  int iterations = 0;
  std::string status;
};
std::vector<HausdorffRow> hausdorff_table(const std::vector<RunSummary>& runs, const std::vector<Vec2>& reference);
void write_hausdorff_csv(const std::string& path, const std::vector<HausdorffRow>& rows);
std::vector<HausdorffRow> read_hausdorff_csv(const std::string& path);
std::string format_hausdorff_summary(const std::vector<HausdorffRow>& rows);

/// Final velocity, adjoint and deformation field of an optimization run.
struct FinalFields {
  std::shared_ptr<const TaylorHoodSpace> space;
  Vector u, v, theta;
};
FinalFields final_fields(const OptConfig& c, const optimizer::OptResult& r);

/// Interpolates a reference P2 vector field onto the P2 nodes of `space`.
/// Nodes outside the reference fluid domain take the value of the nearest
/// reference triangle; `outside` receives their count.
Vector transfer(const TaylorHoodSpace& reference, const Vector& field, const TaylorHoodSpace& space,
                std::vector<char>* node_outside = nullptr, int* outside = nullptr);

/// L2 and H1 norms of a P2 vector field over triangles whose nodes all lie
/// inside the reference domain.
fem::Norms masked_norms(const TaylorHoodSpace& space, const Vector& field, const std::vector<char>& node_outside);

struct FieldEoc {
  std::vector<EocTable> tables;  // "u", "v", "theta"
  std::vector<int> flagged;      // nodes outside the reference per level
};
FieldEoc field_eoc_vs_reference(const std::vector<FinalFields>& levels, const std::vector<double>& h,
                                const FinalFields& reference);

struct SweepRow {
  double l0 = 0.0;
  double volume_variation = 0.0;
  double final_G = 0.0;
  int iterations = 0;
  std::string status;
  bool ok = false;
};
std::vector<SweepRow> l0_sweep(const OptConfig& c, const std::vector<double>& l0_list,
                               const optimizer::ProgressFn& progress = {});
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(const std::string& path);
std::string format_sweep_summary(const std::vector<SweepRow>& rows);
/// Linear interpolation of the first sign change of volume_variation along
/// increasing l0; nullopt if there is none.
std::optional<double> sign_change(const std::vector<SweepRow>& rows);

/// gamma with alpha P - gamma/2 ||curl u||^2 = target on the initial mesh.
struct Calibration {
  double gamma = 0.0;
  double perimeter = 0.0;
  double vort2 = 0.0;
  double target = 0.0;
};
Calibration calibrate_gamma(const OptConfig& c, double target = 0.949);

}  // namespace vortishape::harness
