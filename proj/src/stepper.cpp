#include "emhd/stepper.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <numeric>

#include "emhd/dirichlet.hpp"

namespace emhd {

const char* to_string(StepKind kind) { return kind == StepKind::V ? "V-step" : "W-step"; }

StepError::StepError(int step, StepKind kind, const std::string& what)
    : std::runtime_error("step " + std::to_string(step) + " (" + to_string(kind) + "): " + what),
      step_(step),
      kind_(kind) {}

PreconditionReport check_preconditions(const EnsembleConfig& config) {
  PreconditionReport rep;
  const ViscosityStatistics vs = viscosity_stats(config.members);
  rep.alpha = vs.alpha;
  rep.nonpositive_alpha = vs.flagged;
  for (int j : vs.flagged) {
    rep.warnings.push_back("member " + std::to_string(j + 1) + ": alpha = " + std::to_string(vs.alpha[j]) +
                           " is not positive; the energy bound does not apply");
  }
  rep.mu_ok = config.mu > 0.5;
  if (!rep.mu_ok) {
    rep.warnings.push_back("mu = " + std::to_string(config.mu) + " does not exceed 1/2; the energy bound does not apply");
  }
  return rep;
}

namespace {

void require_members(const EnsembleState& state, int J) {
  if (state.members() != J || state.w.size() != state.v.size()) {
    throw std::invalid_argument("EnsembleStepper: state holds " + std::to_string(state.members()) +
                                " members, expected " + std::to_string(J));
  }
}

double quadratic_form(const SparseMatrix& A, const std::vector<double>& z) {
  const std::vector<double> Az = A * z;
  return std::inner_product(z.begin(), z.end(), Az.begin(), 0.0);
}

}  // namespace

EnsembleStepper::EnsembleStepper(std::shared_ptr<const Mesh> mesh, EnsembleConfig config, ProblemDefinition problem)
    : mesh_(std::move(mesh)),
      config_(std::move(config)),
      problem_(std::move(problem)),
      vel_(FeSpace::vector_p2(mesh_)),
      pres_(FeSpace::scalar_p1_disc(mesh_)) {
  config_.validate();
  if (!problem_.v0 || !problem_.w0) throw std::invalid_argument("EnsembleStepper: initial data missing");
  if (!problem_.v_boundary || !problem_.w_boundary) {
    throw std::invalid_argument("EnsembleStepper: boundary data missing");
  }
  if ((!problem_.f1 || !problem_.f2) && !problem_.zero_forcing) {
    throw std::invalid_argument("EnsembleStepper: forcing missing (set zero_forcing for unforced problems)");
  }
  visc_ = viscosity_stats(config_.members);
  area_ = mesh_->total_area();
  mass_ = assemble_mass(vel_);
  stiff_ = assemble_stiffness(vel_, 1.0);
  div_ = assemble_divergence(vel_, pres_);
  bdofs_ = vel_.boundary_dofs();

  const int nv = vel_.dof_count();
  const int n = saddle_size();
  std::vector<SparseMatrix::Triplet> trips;
  trips.reserve(static_cast<std::size_t>(mass_.nnz() + 2 * div_.nnz() + 1));
  const auto rp = mass_.row_ptr();
  const auto ci = mass_.col_idx();
  for (int r = 0; r < nv; ++r) {
    for (int k = rp[r]; k < rp[r + 1]; ++k) trips.push_back({r, ci[k], 0.0});
  }
  const auto drp = div_.row_ptr();
  const auto dci = div_.col_idx();
  const auto dv = div_.values();
  for (int p = 0; p < div_.rows(); ++p) {
    for (int k = drp[p]; k < drp[p + 1]; ++k) {
      trips.push_back({dci[k], nv + p, -dv[k]});
      trips.push_back({nv + p, dci[k], -dv[k]});
    }
  }
  trips.push_back({nv, nv, 0.0});
  saddle_template_ = SparseMatrix::from_triplets(n, n, trips);
  vel_to_saddle_.resize(static_cast<std::size_t>(mass_.nnz()));
  for (int r = 0; r < nv; ++r) {
    for (int k = rp[r]; k < rp[r + 1]; ++k) vel_to_saddle_[k] = saddle_template_.find(r, ci[k]);
  }
}

EnsembleState EnsembleStepper::initial_state() const {
  EnsembleState st;
  const int J = config_.J;
  for (int j = 0; j < J; ++j) {
    st.v.push_back(interpolate(vel_, VectorFunction([&](double x, double y) { return problem_.v0(j, x, y, 0.0); })));
    st.w.push_back(interpolate(vel_, VectorFunction([&](double x, double y) { return problem_.w0(j, x, y, 0.0); })));
    st.q.emplace_back(static_cast<std::size_t>(pres_.dof_count()), 0.0);
    st.r.emplace_back(static_cast<std::size_t>(pres_.dof_count()), 0.0);
  }
  st.step = 0;
  st.refresh();
  return st;
}

SparseMatrix EnsembleStepper::velocity_block(StepKind, const std::vector<double>& advecting_mean,
                                             const std::vector<std::vector<double>>& advecting_fluctuations) const {
  const double dt = config_.dt;
  const double c = 0.5 * (visc_.nu_bar + visc_.nu_m_bar);
  SparseMatrix A = assemble_convection(vel_, advecting_mean);
  QuadratureField nu_t = eddy_viscosity_at_quadrature(vel_, advecting_fluctuations, config_.mu, dt);
  const bool eddy = std::any_of(nu_t.values.begin(), nu_t.values.end(), [](double x) { return x > 0.0; });
  SparseMatrix KT;
  if (eddy) {
    for (double& x : nu_t.values) x *= 2.0;
    KT = assemble_stiffness(vel_, nu_t);
  }
  auto a = A.values();
  const auto m = mass_.values();
  const auto k = stiff_.values();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = m[i] / dt + c * k[i] + a[i];
  if (eddy) {
    const auto kt = KT.values();
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += kt[i];
  }
  return A;
}

SparseMatrix EnsembleStepper::to_saddle(const SparseMatrix& velocity) const {
  SparseMatrix S = saddle_template_;
  auto sv = S.values();
  const auto vv = velocity.values();
  for (std::size_t i = 0; i < vv.size(); ++i) sv[vel_to_saddle_[i]] = vv[i];
  apply_dirichlet_rows(S, bdofs_);
  const int pin = pinned_row();
  apply_dirichlet_rows(S, std::span<const int>(&pin, 1));
  return S;
}

SparseMatrix EnsembleStepper::assemble_shared_lhs(StepKind kind, const EnsembleState& state) const {
  require_members(state, config_.J);
  const FamilyStatistics& adv = kind == StepKind::V ? state.w_stats : state.v_stats;
  return to_saddle(velocity_block(kind, adv.mean, adv.fluctuations));
}

SparseMatrix EnsembleStepper::assemble_member_lhs(StepKind kind, int j, const EnsembleState& state) const {
  require_members(state, config_.J);
  if (j < 0 || j >= config_.J) throw std::out_of_range("assemble_member_lhs: member index out of range");
  const FamilyStatistics adv = family_statistics(kind == StepKind::V ? state.w : state.v);
  return to_saddle(velocity_block(kind, adv.mean, adv.fluctuations));
}

std::vector<double> EnsembleStepper::boundary_values(const MemberField& g, int j, double t) const {
  const auto& nodes = vel_.nodes();
  const auto& bn = vel_.boundary_nodes();
  std::vector<double> vals(2 * bn.size());
  for (std::size_t i = 0; i < bn.size(); ++i) {
    const Vec2 p = nodes[bn[i]];
    const Vec2 val = g(j, p.x, p.y, t);
    vals[i] = val.x;
    vals[bn.size() + i] = val.y;
  }
  return vals;
}

std::vector<double> EnsembleStepper::assemble_member_rhs(StepKind kind, int j, const EnsembleState& state) const {
  require_members(state, config_.J);
  if (j < 0 || j >= config_.J) throw std::out_of_range("assemble_member_rhs: member index out of range");
  const bool vstep = kind == StepKind::V;
  const std::vector<double>& z = vstep ? state.v[j] : state.w[j];
  const std::vector<double>& other = vstep ? state.w[j] : state.v[j];
  const FamilyStatistics& adv = vstep ? state.w_stats : state.v_stats;
  const MemberField& f = vstep ? problem_.f1 : problem_.f2;
  const MemberField& g = vstep ? problem_.v_boundary : problem_.w_boundary;
  const double dt = config_.dt;
  const double t1 = (state.step + 1) * dt;
  const double nu = config_.members[j].nu;
  const double nu_m = config_.members[j].nu_m;

  const int nv = vel_.dof_count();
  std::vector<double> rhs(static_cast<std::size_t>(saddle_size()), 0.0);
  std::span<double> b(rhs.data(), static_cast<std::size_t>(nv));
  mass_.multiply(z, b);
  for (double& x : b) x /= dt;
  if (f) {
    const std::vector<double> load =
        assemble_load(vel_, VectorFunction([&](double x, double y) { return f(j, x, y, t1); }));
    for (int i = 0; i < nv; ++i) b[i] += load[i];
  } else if (!problem_.zero_forcing) {
    throw std::invalid_argument("assemble_member_rhs: forcing missing");
  }
  apply_convection(vel_, adv.fluctuations[j], z, -1.0, b);
  stiff_.multiply_add(-0.5 * (nu - nu_m), other, b);
  stiff_.multiply_add(-0.5 * (visc_.nu_fluct[j] + visc_.nu_m_fluct[j]), z, b);
  apply_dirichlet_values(b, bdofs_, boundary_values(g, j, t1));
  rhs[pinned_row()] = 0.0;
  return rhs;
}

const std::shared_ptr<const SymbolicAnalysis>& EnsembleStepper::symbolic(const SparseMatrix& A) const {
  std::call_once(symbolic_once_, [&] { symbolic_ = std::make_shared<const SymbolicAnalysis>(A); });
  return symbolic_;
}

StepSystem EnsembleStepper::build_step_system(StepKind kind, const EnsembleState& state) const {
  StepSystem sys;
  sys.kind = kind;
  sys.matrix = assemble_shared_lhs(kind, state);
  try {
    sys.factorization = std::make_shared<const SparseLU>(sys.matrix, symbolic(sys.matrix));
  } catch (const SingularMatrixError& e) {
    throw ConfigurationError(state.step, kind, std::string("saddle matrix singular after pressure pinning: ") + e.what());
  }
  sys.rhs.reserve(static_cast<std::size_t>(config_.J));
  for (int j = 0; j < config_.J; ++j) sys.rhs.push_back(assemble_member_rhs(kind, j, state));
  return sys;
}

StepDiagnostics EnsembleStepper::advance(EnsembleState& state) const {
  require_members(state, config_.J);
  const int nv = vel_.dof_count();
  StepDiagnostics diag;
  std::vector<std::vector<double>> new_v, new_w, new_q, new_r;
  for (StepKind kind : {StepKind::V, StepKind::W}) {
    try {
      const StepSystem sys = build_step_system(kind, state);
      const auto X = sys.factorization->solve_block(sys.rhs);
      (kind == StepKind::V ? diag.rcond_v : diag.rcond_w) = sys.factorization->rcond();
      auto& zs = kind == StepKind::V ? new_v : new_w;
      auto& ps = kind == StepKind::V ? new_q : new_r;
      for (int j = 0; j < config_.J; ++j) {
        const auto& x = X[j];
        diag.max_relative_residual = std::max(diag.max_relative_residual, relative_residual(sys.matrix, x, sys.rhs[j]));
        for (double xi : x) {
          if (!std::isfinite(xi)) throw std::runtime_error("non-finite solution for member " + std::to_string(j + 1));
        }
        zs.emplace_back(x.begin(), x.begin() + nv);
        std::vector<double> p(x.begin() + nv, x.end());
        const double shift = integral(pres_, p) / area_;
        for (double& pi : p) pi -= shift;
        ps.push_back(std::move(p));
      }
    } catch (const StepError&) {
      throw;
    } catch (const std::exception& e) {
      throw StepError(state.step, kind, e.what());
    }
  }
  state.v = std::move(new_v);
  state.w = std::move(new_w);
  state.q = std::move(new_q);
  state.r = std::move(new_r);
  state.step += 1;
  state.refresh();
  return diag;
}

double EnsembleStepper::l2_sq(const std::vector<double>& z) const { return quadratic_form(mass_, z); }
double EnsembleStepper::grad_sq(const std::vector<double>& z) const { return quadratic_form(stiff_, z); }

double EnsembleStepper::energy(const EnsembleState& state) const {
  return 0.5 * (l2_sq(state.v_stats.mean) + l2_sq(state.w_stats.mean));
}

const SparseLU& EnsembleStepper::dual_norm_solver() const {
  std::call_once(dual_once_, [&] {
    SparseMatrix K = stiff_;
    apply_dirichlet_rows(K, bdofs_);
    dual_solver_ = std::make_unique<SparseLU>(K);
  });
  return *dual_solver_;
}

double EnsembleStepper::forcing_dual_norm_sq(const MemberField& f, int j, double t) const {
  if (!f) return 0.0;
  std::vector<double> b = assemble_load(vel_, VectorFunction([&](double x, double y) { return f(j, x, y, t); }));
  for (int d : bdofs_) b[d] = 0.0;
  const std::vector<double> x = dual_norm_solver().solve(b);
  return std::inner_product(b.begin(), b.end(), x.begin(), 0.0);
}

namespace {

double max_member_divergence(const EnsembleStepper& s, const EnsembleState& st) {
  double d = 0.0;
  for (int j = 0; j < st.members(); ++j) {
    d = std::max({d, divergence_l2(s.velocity_space(), st.v[j]), divergence_l2(s.velocity_space(), st.w[j])});
  }
  return d;
}

void record_level(const EnsembleStepper& s, const EnsembleState& st, RunReport& rep) {
  rep.energy.push_back(s.energy(st));
  rep.max_divergence.push_back(max_member_divergence(s, st));
  for (int j = 0; j < st.members(); ++j) {
    rep.v_l2_sq[j].push_back(s.l2_sq(st.v[j]));
    rep.w_l2_sq[j].push_back(s.l2_sq(st.w[j]));
    rep.v_grad_sq[j].push_back(s.grad_sq(st.v[j]));
    rep.w_grad_sq[j].push_back(s.grad_sq(st.w[j]));
  }
}

}  // namespace

RunResult run(const EnsembleStepper& stepper, const RunOptions& options) {
  const EnsembleConfig& cfg = stepper.config();
  const int M = cfg.step_count();
  const int J = cfg.J;
  RunResult res;
  RunReport& rep = res.report;
  rep.dt = cfg.dt;
  rep.mu = cfg.mu;
  rep.alpha = stepper.viscosity().alpha;
  rep.zero_forcing = stepper.problem().zero_forcing && !stepper.problem().f1 && !stepper.problem().f2;
  rep.preconditions = check_preconditions(cfg);
  for (const auto& w : rep.preconditions.warnings) std::clog << "WARNING: " << w << '\n';
  rep.v_l2_sq.assign(J, {});
  rep.w_l2_sq.assign(J, {});
  rep.v_grad_sq.assign(J, {});
  rep.w_grad_sq.assign(J, {});
  if (options.track_forcing_dual_norms) {
    rep.f1_dual_sq.assign(J, {});
    rep.f2_dual_sq.assign(J, {});
  }

  EnsembleState& state = res.final_state;
  state = stepper.initial_state();
  record_level(stepper, state, rep);
  if (options.observer) options.observer(stepper, state);
  for (int n = 0; n < M; ++n) {
    const auto t0 = std::chrono::steady_clock::now();
    StepDiagnostics diag;
    try {
      diag = stepper.advance(state);
    } catch (const std::exception& e) {
      res.failure = e.what();
      return res;
    }
    rep.step_seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    rep.max_residual.push_back(diag.max_relative_residual);
    rep.steps = n + 1;
    if (options.track_forcing_dual_norms) {
      const double t1 = (n + 1) * cfg.dt;
      for (int j = 0; j < J; ++j) {
        rep.f1_dual_sq[j].push_back(stepper.forcing_dual_norm_sq(stepper.problem().f1, j, t1));
        rep.f2_dual_sq[j].push_back(stepper.forcing_dual_norm_sq(stepper.problem().f2, j, t1));
      }
    }
    record_level(stepper, state, rep);
    if (options.observer) options.observer(stepper, state);
  }
  return res;
}

RunResult run(std::shared_ptr<const Mesh> mesh, const EnsembleConfig& config, const ProblemDefinition& problem,
              const RunOptions& options) {
  const EnsembleStepper stepper(std::move(mesh), config, problem);
  return run(stepper, options);
}

StabilityCheck verify_stability_bound(const RunReport& report, const EnsembleConfig& config) {
  const int J = static_cast<int>(report.v_l2_sq.size());
  const int M = report.steps;
  const bool forced = !report.zero_forcing;
  if (forced && (report.f1_dual_sq.size() != static_cast<std::size_t>(J) ||
                 report.f2_dual_sq.size() != static_cast<std::size_t>(J))) {
    throw std::invalid_argument("verify_stability_bound: forcing dual norms were not tracked");
  }
  const ViscosityStatistics vs = viscosity_stats(config.members);
  const double c = 0.5 * (vs.nu_bar + vs.nu_m_bar);
  const double dt = report.dt;
  StabilityCheck chk;
  for (int j = 0; j < J; ++j) {
    const double a = vs.alpha[j];
    double lhs = report.v_l2_sq[j][M] + report.w_l2_sq[j][M] +
                 c * dt * (report.v_grad_sq[j][M] + report.w_grad_sq[j][M]);
    double rhs = report.v_l2_sq[j][0] + report.w_l2_sq[j][0] +
                 c * dt * (report.v_grad_sq[j][0] + report.w_grad_sq[j][0]);
    double grad_sum = 0.0, f_sum = 0.0;
    for (int n = 0; n < M; ++n) {
      grad_sum += report.v_grad_sq[j][n] + report.w_grad_sq[j][n];
      if (forced) f_sum += report.f1_dual_sq[j][n] + report.f2_dual_sq[j][n];
    }
    lhs += 0.5 * a * dt * grad_sum;
    const bool valid = a > 0.0 && config.mu > 0.5;
    if (valid) rhs += 2.0 * dt / a * f_sum;
    const bool ok = valid && lhs <= rhs * (1.0 + 1e-8);
    chk.lhs.push_back(lhs);
    chk.rhs.push_back(rhs);
    chk.member_holds.push_back(ok);
    chk.holds = chk.holds && ok;
  }
  return chk;
}

}  // namespace emhd
