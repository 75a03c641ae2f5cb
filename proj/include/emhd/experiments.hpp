#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "emhd/ensemble.hpp"
#include "emhd/mesh.hpp"
#include "emhd/mms.hpp"
#include "emhd/stepper.hpp"

namespace emhd {

/// log(e1 / e2) / log(s1 / s2). Throws std::invalid_argument on a
/// nonpositive input or s1 == s2.
double compute_rate(double e1, double e2, double s1, double s2);

struct RateRow {
  double step = 0.0;  // h or dt
  double err_v = 0.0;
  double err_w = 0.0;
  std::optional<double> rate_v;  // empty on the first row
  std::optional<double> rate_w;
};

struct RateTable {
  std::vector<RateRow> rows;
  void add(double step, double err_v, double err_w);
};

/// Header h_or_dt,err_v,rate_v,err_w,rate_w; rates blank on the first row.
void write_rate_csv(std::ostream& os, const RateTable& table);

/// Shared settings of the manufactured-solution studies.
struct StudySettings {
  int J = 20;
  double eps = 0.0;
  double mu = 1.0;
  double s = 1.0;
  ViscosityRanges ranges{0.009, 0.011, 0.09, 0.11};
  /// Used instead of sampling `ranges` when nonempty; size must equal J.
  std::vector<MemberParams> members;
  bool deterministic_grid = false;
  std::uint64_t seed = 42;
  ErrorReference reference = ErrorReference::Interpolant;
};

EnsembleConfig make_config(const StudySettings& settings, double dt, double T);

/// Unit square with n x n cells, barycentrically refined; nominal h = 1/n.
std::shared_ptr<const Mesh> unit_square_sv_mesh(int n);

struct ConvergenceStudy {
  RateTable table;      // errors against settings.reference
  RateTable alternate;  // errors against the other reference
  /// Largest ||div|| of any member at any level n >= 1 over all runs.
  double max_divergence = 0.0;
};

/// Fixed dt = T / steps; one run per n in `subdivisions` (h = 1/n).
ConvergenceStudy run_spatial_convergence(const StudySettings& settings, const std::vector<int>& subdivisions,
                                         double T = 0.001, int steps = 8);
/// Fixed mesh (h = 1/subdivisions); one run per dt = T / m, m in step_counts.
ConvergenceStudy run_temporal_convergence(const StudySettings& settings, int subdivisions,
                                          const std::vector<int>& step_counts, double T = 1.0);

struct EnergyTest {
  RunReport report;
  StabilityCheck stability;
  /// max_n (E^{n+1} - E^n) / E^0
  double max_relative_increase = 0.0;
  bool dissipative = false;  // every increase <= 1e-12 E^0
  std::optional<std::string> failure;
};

/// Manufactured initial data, zero forcing, homogeneous Dirichlet data.
EnergyTest run_energy_test(const StudySettings& settings, int subdivisions = 32, double dt = 0.05, double T = 1.0,
                           const RunOptions& options = {});

/// Stepper and run of one field experiment, kept together so the fields can
/// be post-processed on the stepper's spaces.
struct FieldRun {
  std::shared_ptr<const EnsembleStepper> stepper;
  RunResult result;
};

/// Ensemble averages in primitive variables: u = (<v> + <w>)/2,
/// B = (<v> - <w>)/(2 sqrt(s)); B is zero when s = 0.
struct PrimitiveAverage {
  std::vector<double> u;
  std::vector<double> B;
};
PrimitiveAverage primitive_average(const EnsembleState& state, double s);

struct CavitySettings {
  int J = 20;
  double re_mean = 1000.0;      // Re_j uniform on re_mean [1/1.1, 1/0.9], nu_j = 2 / Re_j
  double nu_m_lo = 0.009, nu_m_hi = 0.011;
  double s = 0.01;
  double eps = 0.0;
  double mu = 1.0;
  double h = 1.0 / 16.0;        // cell size on (-1, 1)^2 before refinement
  double dt = 1.0;
  double T = 50.0;
  bool deterministic_grid = false;
  std::uint64_t seed = 42;
};

/// Regularized lid-driven cavity on (-1, 1)^2 from rest: lid velocity
/// c_j ((1 - x^2)^2, 0), magnetic field c_j (0, 1) on every side.
FieldRun run_cavity(const CavitySettings& settings, const RunOptions& options = {});
std::vector<MemberParams> cavity_members(const CavitySettings& settings);

struct ChannelSettings {
  int J = 20;
  double s = 0.001;
  double mu = 1.0;
  double h = 0.8;
  double dt = 0.05;
  double T = 10.0;
  std::vector<double> eps_list{0.1, 0.01, 0.0};
  ViscosityRanges ranges{0.0009, 0.0011, 0.009, 0.011};
  bool deterministic_grid = false;
  std::uint64_t seed = 42;
  /// Every member uses the sample-mean viscosities instead of its own pair.
  bool shared_mean_parameters = false;
};

struct ChannelStudy {
  std::vector<double> eps;
  std::vector<FieldRun> ensembles;  // one per eps
  FieldRun usual;                   // J = 1 at the mean viscosities, eps = 0
  /// ||<u_h> - u_usual||_{L2} and ||<B_h> - B_usual||_{L2} at T, per eps.
  std::vector<double> velocity_distance;
  std::vector<double> magnetic_distance;
};

/// Step channel: parabolic inflow c_j (y (10 - y) / 25, 0) at the inlet and
/// outlet, no-slip walls, magnetic field c_j (0, 1) on the whole boundary,
/// initial velocity the inflow profile and zero magnetic field.
ChannelStudy run_step_channel(const ChannelSettings& settings);
ProblemDefinition channel_problem(double s, double eps);
ProblemDefinition cavity_problem(double s, double eps);

/// Legacy VTK ASCII of P2 fields, each triangle split into four linear
/// sub-triangles at its nodes. Point data: velocity, magnetic_field, speed,
/// magnetic_magnitude.
void write_field_vtk(std::ostream& os, const FeSpace& space, const std::vector<double>& u,
                     const std::vector<double>& B, const std::string& title);

/// Columns n,t,energy.
void write_energy_csv(std::ostream& os, const RunReport& report);

}  // namespace emhd
