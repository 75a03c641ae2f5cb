#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "emhd/assembly.hpp"
#include "emhd/ensemble.hpp"
#include "emhd/fe_space.hpp"
#include "emhd/mesh.hpp"
#include "emhd/sparse_lu.hpp"
#include "emhd/sparse_matrix.hpp"

namespace emhd {

/// V: all v_j advected by <w>; W: all w_j advected by <v>.
enum class StepKind { V, W };
const char* to_string(StepKind kind);

/// Member-indexed field; j is the 0-based member index.
using MemberField = std::function<Vec2(int j, double x, double y, double t)>;

/// Initial data, Dirichlet data and forcing in Elsässer variables.
struct ProblemDefinition {
  MemberField v0, w0;
  MemberField v_boundary, w_boundary;
  MemberField f1, f2;
  /// Must be set when f1 and f2 are left empty.
  bool zero_forcing = false;
};

class StepError : public std::runtime_error {
 public:
  StepError(int step, StepKind kind, const std::string& what);
  int step() const { return step_; }
  StepKind kind() const { return kind_; }

 private:
  int step_;
  StepKind kind_;
};

/// The shared saddle matrix is singular even after pressure pinning.
class ConfigurationError : public StepError {
 public:
  using StepError::StepError;
};

struct PreconditionReport {
  std::vector<int> nonpositive_alpha;  // 0-based members with alpha_j <= 0
  std::vector<double> alpha;
  bool mu_ok = true;                   // mu > 1/2
  std::vector<std::string> warnings;
  bool ok() const { return nonpositive_alpha.empty() && mu_ok; }
};
PreconditionReport check_preconditions(const EnsembleConfig& config);

/// One sub-step's shared system: a single matrix and factorization, one
/// right-hand-side column per member.
struct StepSystem {
  StepKind kind = StepKind::V;
  SparseMatrix matrix;
  std::shared_ptr<const SparseLU> factorization;
  std::vector<std::vector<double>> rhs;
};

struct StepDiagnostics {
  double max_relative_residual = 0.0;
  double rcond_v = 0.0;
  double rcond_w = 0.0;
};

/// Saddle unknowns are [velocity (2 * node_count) | pressure (3 * cells)]:
///   [ A  -B^T ] [z]   [b]
///   [-B   0   ] [p] = [0]
/// with Dirichlet rows replaced by identity rows and pressure dof 0 pinned.
/// Pressures are shifted to zero mean after each solve.
class EnsembleStepper {
 public:
  EnsembleStepper(std::shared_ptr<const Mesh> mesh, EnsembleConfig config, ProblemDefinition problem);

  const FeSpace& velocity_space() const { return vel_; }
  const FeSpace& pressure_space() const { return pres_; }
  const EnsembleConfig& config() const { return config_; }
  const ProblemDefinition& problem() const { return problem_; }
  const ViscosityStatistics& viscosity() const { return visc_; }
  const SparseMatrix& mass() const { return mass_; }
  const SparseMatrix& stiffness() const { return stiff_; }
  const SparseMatrix& divergence() const { return div_; }
  const std::vector<int>& boundary_dofs() const { return bdofs_; }
  int velocity_size() const { return vel_.dof_count(); }
  int saddle_size() const { return vel_.dof_count() + pres_.dof_count(); }
  int pinned_row() const { return vel_.dof_count(); }

  /// Nodal interpolants of the initial data; zero pressures; step 0.
  EnsembleState initial_state() const;

  /// Velocity block M/dt + N(<a>) + (nu_bar + nu_m_bar)/2 K + K(2 nu_T(a')),
  /// where a is the advecting family (w for V, v for W).
  SparseMatrix velocity_block(StepKind kind, const std::vector<double>& advecting_mean,
                              const std::vector<std::vector<double>>& advecting_fluctuations) const;
  /// Full saddle matrix from the state's cached ensemble statistics.
  SparseMatrix assemble_shared_lhs(StepKind kind, const EnsembleState& state) const;
  /// The saddle matrix rebuilt as member j would from freshly computed
  /// statistics; equals assemble_shared_lhs bitwise.
  SparseMatrix assemble_member_lhs(StepKind kind, int j, const EnsembleState& state) const;
  /// Right-hand side of member j for the step from state.step to state.step + 1.
  std::vector<double> assemble_member_rhs(StepKind kind, int j, const EnsembleState& state) const;
  /// Matrix, factorization and all member right-hand sides of one sub-step.
  StepSystem build_step_system(StepKind kind, const EnsembleState& state) const;

  /// Advances every member by one step. Both sub-steps read level-n data
  /// only. On failure the state is left unchanged and StepError is thrown.
  StepDiagnostics advance(EnsembleState& state) const;

  /// 1/2 (||<v>||^2 + ||<w>||^2).
  double energy(const EnsembleState& state) const;
  /// Discrete H^{-1} norm squared of a forcing, sup over V_h with zero trace.
  double forcing_dual_norm_sq(const MemberField& f, int j, double t) const;

  double l2_sq(const std::vector<double>& z) const;
  double grad_sq(const std::vector<double>& z) const;

 private:
  SparseMatrix to_saddle(const SparseMatrix& velocity) const;
  std::vector<double> boundary_values(const MemberField& g, int j, double t) const;
  const std::shared_ptr<const SymbolicAnalysis>& symbolic(const SparseMatrix& A) const;
  const SparseLU& dual_norm_solver() const;

  std::shared_ptr<const Mesh> mesh_;
  EnsembleConfig config_;
  ProblemDefinition problem_;
  ViscosityStatistics visc_;
  FeSpace vel_;
  FeSpace pres_;
  double area_ = 0.0;
  SparseMatrix mass_;
  SparseMatrix stiff_;
  SparseMatrix div_;
  std::vector<int> bdofs_;
  SparseMatrix saddle_template_;
  std::vector<int> vel_to_saddle_;

  mutable std::once_flag symbolic_once_;
  mutable std::shared_ptr<const SymbolicAnalysis> symbolic_;
  mutable std::once_flag dual_once_;
  mutable std::unique_ptr<SparseLU> dual_solver_;
};

struct RunReport {
  int steps = 0;
  double dt = 0.0;
  double mu = 0.0;
  std::vector<double> alpha;
  std::vector<double> energy;          // E^0 .. E^M
  std::vector<double> max_divergence;  // max_j of ||div v_j||, ||div w_j|| at each level
  std::vector<double> step_seconds;
  std::vector<double> max_residual;
  PreconditionReport preconditions;
  // [j][n], n = 0..M
  std::vector<std::vector<double>> v_l2_sq, w_l2_sq, v_grad_sq, w_grad_sq;
  // [j][n] = ||f(t^{n+1})||_{-1}^2, n = 0..M-1; empty unless tracked.
  std::vector<std::vector<double>> f1_dual_sq, f2_dual_sq;
  bool zero_forcing = false;
};

struct RunOptions {
  bool track_forcing_dual_norms = false;
  /// Called with the state at every level n = 0..M.
  std::function<void(const EnsembleStepper&, const EnsembleState&)> observer;
};

struct RunResult {
  RunReport report;
  EnsembleState final_state;
  /// Set when a step failed; report and final_state then cover the levels
  /// reached before the failure.
  std::optional<std::string> failure;
};

RunResult run(const EnsembleStepper& stepper, const RunOptions& options = {});
RunResult run(std::shared_ptr<const Mesh> mesh, const EnsembleConfig& config, const ProblemDefinition& problem,
              const RunOptions& options = {});

struct StabilityCheck {
  bool holds = true;
  std::vector<double> lhs;
  std::vector<double> rhs;
  std::vector<bool> member_holds;
};

/// Evaluates both sides of the discrete energy inequality for every member:
///   ||v^M||^2 + ||w^M||^2 + c dt (||grad v^M||^2 + ||grad w^M||^2)
///     + alpha_j dt / 2 sum_{n<M} (||grad v^n||^2 + ||grad w^n||^2)
///   <= ||v^0||^2 + ||w^0||^2 + c dt (||grad v^0||^2 + ||grad w^0||^2)
///     + 2 dt / alpha_j sum_{n<M} (||f1(t^{n+1})||_{-1}^2 + ||f2(t^{n+1})||_{-1}^2)
/// with c = (nu_bar + nu_m_bar) / 2, accepting lhs <= rhs (1 + 1e-8).
/// Throws std::invalid_argument if forcing norms were not tracked for a
/// forced run.
StabilityCheck verify_stability_bound(const RunReport& report, const EnsembleConfig& config);

}  // namespace emhd
