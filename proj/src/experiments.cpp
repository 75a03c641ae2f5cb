#include "emhd/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace emhd {

double compute_rate(double e1, double e2, double s1, double s2) {
  if (!(e1 > 0.0) || !(e2 > 0.0) || !(s1 > 0.0) || !(s2 > 0.0)) {
    throw std::invalid_argument("compute_rate: errors and step sizes must be positive");
  }
  if (s1 == s2) throw std::invalid_argument("compute_rate: step sizes must differ");
  return std::log(e1 / e2) / std::log(s1 / s2);
}

void RateTable::add(double step, double err_v, double err_w) {
  RateRow row{step, err_v, err_w, std::nullopt, std::nullopt};
  if (!rows.empty()) {
    const RateRow& prev = rows.back();
    row.rate_v = compute_rate(prev.err_v, err_v, prev.step, step);
    row.rate_w = compute_rate(prev.err_w, err_w, prev.step, step);
  }
  rows.push_back(row);
}

void write_rate_csv(std::ostream& os, const RateTable& table) {
  os << "h_or_dt,err_v,rate_v,err_w,rate_w\n";
  const auto flags = os.flags();
  for (const auto& r : table.rows) {
    os << std::setprecision(17) << r.step << ',' << std::scientific << std::setprecision(6) << r.err_v << ',';
    if (r.rate_v) os << std::fixed << std::setprecision(4) << *r.rate_v;
    os << ',' << std::scientific << std::setprecision(6) << r.err_w << ',';
    if (r.rate_w) os << std::fixed << std::setprecision(4) << *r.rate_w;
    os << '\n';
    os.flags(flags);
  }
}

EnsembleConfig make_config(const StudySettings& settings, double dt, double T) {
  EnsembleConfig cfg;
  cfg.J = settings.J;
  cfg.s = settings.s;
  cfg.mu = settings.mu;
  cfg.dt = dt;
  cfg.T = T;
  cfg.eps = settings.eps;
  cfg.rng_seed = settings.seed;
  cfg.members = settings.members.empty()
                    ? sample_viscosities(settings.ranges, settings.J, settings.seed, settings.deterministic_grid)
                    : settings.members;
  return cfg;
}

std::shared_ptr<const Mesh> unit_square_sv_mesh(int n) {
  return std::make_shared<const Mesh>(barycentric_refine(build_structured_square(n)));
}

namespace {

struct MmsErrors {
  double primary_v, primary_w, alternate_v, alternate_w, max_divergence;
};

MmsErrors mms_errors(const StudySettings& settings, std::shared_ptr<const Mesh> mesh, double dt, double T) {
  const EnsembleConfig cfg = make_config(settings, dt, T);
  const MmsProblem problem(settings.eps, cfg.members);
  const EnsembleStepper stepper(std::move(mesh), cfg, problem.definition());
  const ErrorReference other =
      settings.reference == ErrorReference::Interpolant ? ErrorReference::Exact : ErrorReference::Interpolant;
  Norm21Accumulator primary(stepper.velocity_space(), dt, settings.reference, mms::v, mms::grad_v, mms::w,
                            mms::grad_w);
  Norm21Accumulator alternate(stepper.velocity_space(), dt, other, mms::v, mms::grad_v, mms::w, mms::grad_w);
  RunOptions opts;
  opts.observer = [&](const EnsembleStepper&, const EnsembleState& st) {
    primary.add(st.step, st.v_stats.mean, st.w_stats.mean);
    alternate.add(st.step, st.v_stats.mean, st.w_stats.mean);
  };
  const RunResult res = run(stepper, opts);
  if (res.failure) throw std::runtime_error(*res.failure);
  const auto& div = res.report.max_divergence;
  const double dmax = div.size() > 1 ? *std::max_element(div.begin() + 1, div.end()) : 0.0;
  return {primary.error_v(), primary.error_w(), alternate.error_v(), alternate.error_w(), dmax};
}

}  // namespace

ConvergenceStudy run_spatial_convergence(const StudySettings& settings, const std::vector<int>& subdivisions,
                                         double T, int steps) {
  if (steps < 1) throw std::invalid_argument("run_spatial_convergence: steps must be positive");
  ConvergenceStudy study;
  for (int n : subdivisions) {
    const MmsErrors e = mms_errors(settings, unit_square_sv_mesh(n), T / steps, T);
    study.table.add(1.0 / n, e.primary_v, e.primary_w);
    study.alternate.add(1.0 / n, e.alternate_v, e.alternate_w);
    study.max_divergence = std::max(study.max_divergence, e.max_divergence);
  }
  return study;
}

ConvergenceStudy run_temporal_convergence(const StudySettings& settings, int subdivisions,
                                          const std::vector<int>& step_counts, double T) {
  ConvergenceStudy study;
  const auto mesh = unit_square_sv_mesh(subdivisions);
  for (int m : step_counts) {
    if (m < 1) throw std::invalid_argument("run_temporal_convergence: step counts must be positive");
    const MmsErrors e = mms_errors(settings, mesh, T / m, T);
    study.table.add(T / m, e.primary_v, e.primary_w);
    study.alternate.add(T / m, e.alternate_v, e.alternate_w);
    study.max_divergence = std::max(study.max_divergence, e.max_divergence);
  }
  return study;
}

EnergyTest run_energy_test(const StudySettings& settings, int subdivisions, double dt, double T,
                           const RunOptions& options) {
  const EnsembleConfig cfg = make_config(settings, dt, T);
  const MmsProblem problem(settings.eps, cfg.members);
  const EnsembleStepper stepper(unit_square_sv_mesh(subdivisions), cfg, problem.unforced_homogeneous_definition());
  RunResult res = run(stepper, options);
  EnergyTest out;
  out.failure = res.failure;
  out.report = std::move(res.report);
  const auto& E = out.report.energy;
  out.max_relative_increase = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n + 1 < E.size(); ++n) {
    out.max_relative_increase = std::max(out.max_relative_increase, (E[n + 1] - E[n]) / E[0]);
  }
  out.dissipative = !out.failure && E.size() > 1 && out.max_relative_increase <= 1e-12;
  out.stability = verify_stability_bound(out.report, cfg);
  return out;
}

PrimitiveAverage primitive_average(const EnsembleState& state, double s) {
  if (s == 0.0) {
    PrimitiveAverage out;
    out.u.resize(state.v_stats.mean.size());
    for (std::size_t i = 0; i < out.u.size(); ++i) out.u[i] = 0.5 * (state.v_stats.mean[i] + state.w_stats.mean[i]);
    out.B.assign(out.u.size(), 0.0);
    return out;
  }
  PrimitiveFields p = primitive_from_elsasser(state.v_stats.mean, state.w_stats.mean, s);
  return {std::move(p.u), std::move(p.B)};
}

namespace {

// Primitive data (u, B) of member j mapped to Elsässer data.
using PrimitiveData = std::function<std::pair<Vec2, Vec2>(int j, double x, double y, double t)>;

ProblemDefinition from_primitive(double s, const PrimitiveData& initial, const PrimitiveData& boundary) {
  if (!(s >= 0.0)) throw std::invalid_argument("coupling number s must be nonnegative");
  ProblemDefinition p;
  p.v0 = [=](int j, double x, double y, double t) {
    const auto [u, B] = initial(j, x, y, t);
    return elsasser_from_primitive(u, B, s).v;
  };
  p.w0 = [=](int j, double x, double y, double t) {
    const auto [u, B] = initial(j, x, y, t);
    return elsasser_from_primitive(u, B, s).w;
  };
  p.v_boundary = [=](int j, double x, double y, double t) {
    const auto [u, B] = boundary(j, x, y, t);
    return elsasser_from_primitive(u, B, s).v;
  };
  p.w_boundary = [=](int j, double x, double y, double t) {
    const auto [u, B] = boundary(j, x, y, t);
    return elsasser_from_primitive(u, B, s).w;
  };
  p.zero_forcing = true;
  return p;
}

double parabola(double y) { return y * (kChannelHeight - y) / 25.0; }

}  // namespace

ProblemDefinition cavity_problem(double s, double eps) {
  const auto initial = [](int, double, double, double) { return std::pair<Vec2, Vec2>{}; };
  const auto boundary = [eps](int j, double x, double y, double) {
    const double c = perturbation_factor(j + 1, eps);
    const double lid = y == 1.0 ? c * (1.0 - x * x) * (1.0 - x * x) : 0.0;
    return std::pair<Vec2, Vec2>{{lid, 0.0}, {0.0, c}};
  };
  return from_primitive(s, initial, boundary);
}

ProblemDefinition channel_problem(double s, double eps) {
  const auto initial = [eps](int j, double, double y, double) {
    const double c = perturbation_factor(j + 1, eps);
    return std::pair<Vec2, Vec2>{{c * parabola(y), 0.0}, {}};
  };
  const auto boundary = [eps](int j, double x, double y, double) {
    const double c = perturbation_factor(j + 1, eps);
    const bool open = x == 0.0 || x == kChannelLength;
    return std::pair<Vec2, Vec2>{{open ? c * parabola(y) : 0.0, 0.0}, {0.0, c}};
  };
  return from_primitive(s, initial, boundary);
}

std::vector<MemberParams> cavity_members(const CavitySettings& st) {
  // Sampling 1/Re uniformly would bias the Reynolds interval; sample Re and
  // map through nu = 2 / Re.
  const ViscosityRanges re{st.re_mean / 1.1, st.re_mean / 0.9, st.nu_m_lo, st.nu_m_hi};
  std::vector<MemberParams> m = sample_viscosities(re, st.J, st.seed, st.deterministic_grid);
  for (auto& p : m) p.nu = 2.0 / p.nu;
  return m;
}

FieldRun run_cavity(const CavitySettings& st, const RunOptions& options) {
  const int n = static_cast<int>(std::lround(2.0 / st.h));
  if (n < 1) throw std::invalid_argument("run_cavity: h must not exceed 2");
  auto mesh = std::make_shared<const Mesh>(
      barycentric_refine(build_structured_square(n, Box{-1.0, 1.0, -1.0, 1.0}, SquareMarking::LidDriven)));
  EnsembleConfig cfg;
  cfg.J = st.J;
  cfg.s = st.s;
  cfg.mu = st.mu;
  cfg.dt = st.dt;
  cfg.T = st.T;
  cfg.eps = st.eps;
  cfg.rng_seed = st.seed;
  cfg.members = cavity_members(st);
  FieldRun out;
  out.stepper = std::make_shared<const EnsembleStepper>(mesh, cfg, cavity_problem(st.s, st.eps));
  out.result = run(*out.stepper, options);
  return out;
}

ChannelStudy run_step_channel(const ChannelSettings& st) {
  auto mesh = std::make_shared<const Mesh>(barycentric_refine(build_step_channel(st.h)));
  const std::vector<MemberParams> sampled = sample_viscosities(st.ranges, st.J, st.seed, st.deterministic_grid);
  const ViscosityStatistics vs = viscosity_stats(sampled);
  const MemberParams mean{vs.nu_bar, vs.nu_m_bar};

  auto make = [&](int J, std::vector<MemberParams> members, double eps) {
    EnsembleConfig cfg;
    cfg.J = J;
    cfg.s = st.s;
    cfg.mu = st.mu;
    cfg.dt = st.dt;
    cfg.T = st.T;
    cfg.eps = eps;
    cfg.rng_seed = st.seed;
    cfg.members = std::move(members);
    FieldRun fr;
    fr.stepper = std::make_shared<const EnsembleStepper>(mesh, cfg, channel_problem(st.s, eps));
    fr.result = run(*fr.stepper);
    return fr;
  };

  ChannelStudy study;
  study.usual = make(1, {mean}, 0.0);
  const PrimitiveAverage usual = primitive_average(study.usual.result.final_state, st.s);
  for (double eps : st.eps_list) {
    std::vector<MemberParams> members =
        st.shared_mean_parameters ? std::vector<MemberParams>(static_cast<std::size_t>(st.J), mean) : sampled;
    FieldRun fr = make(st.J, std::move(members), eps);
    const PrimitiveAverage avg = primitive_average(fr.result.final_state, st.s);
    std::vector<double> du(avg.u.size()), dB(avg.B.size());
    for (std::size_t i = 0; i < du.size(); ++i) {
      du[i] = avg.u[i] - usual.u[i];
      dB[i] = avg.B[i] - usual.B[i];
    }
    study.velocity_distance.push_back(norm_l2(fr.stepper->velocity_space(), du));
    study.magnetic_distance.push_back(norm_l2(fr.stepper->velocity_space(), dB));
    study.eps.push_back(eps);
    study.ensembles.push_back(std::move(fr));
  }
  return study;
}

void write_field_vtk(std::ostream& os, const FeSpace& space, const std::vector<double>& u,
                     const std::vector<double>& B, const std::string& title) {
  if (space.kind() != SpaceKind::VectorP2) throw std::invalid_argument("write_field_vtk: needs a VectorP2 space");
  const int nn = space.node_count();
  if (u.size() != static_cast<std::size_t>(2 * nn) || B.size() != u.size()) {
    throw std::invalid_argument("write_field_vtk: field sizes do not match the space");
  }
  const auto flags = os.flags();
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << nn << " double\n" << std::setprecision(17);
  for (const Vec2& p : space.nodes()) os << p.x << ' ' << p.y << " 0\n";
  const int cells = 4 * space.cell_count();
  os << "CELLS " << cells << ' ' << 4 * cells << '\n';
  // Local nodes: vertices 0..2, then midpoints opposite vertex 0, 1, 2.
  static constexpr int kSub[4][3] = {{0, 5, 4}, {5, 1, 3}, {4, 3, 2}, {3, 4, 5}};
  for (int c = 0; c < space.cell_count(); ++c) {
    const auto nodes = space.cell_nodes(c);
    for (const auto& s : kSub) os << "3 " << nodes[s[0]] << ' ' << nodes[s[1]] << ' ' << nodes[s[2]] << '\n';
  }
  os << "CELL_TYPES " << cells << '\n';
  for (int c = 0; c < cells; ++c) os << "5\n";
  os << "POINT_DATA " << nn << '\n';
  auto vector_field = [&](const char* name, const std::vector<double>& f) {
    os << "VECTORS " << name << " double\n";
    for (int i = 0; i < nn; ++i) os << f[i] << ' ' << f[nn + i] << " 0\n";
  };
  auto magnitude = [&](const char* name, const std::vector<double>& f) {
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < nn; ++i) os << std::hypot(f[i], f[nn + i]) << '\n';
  };
  vector_field("velocity", u);
  vector_field("magnetic_field", B);
  magnitude("speed", u);
  magnitude("magnetic_magnitude", B);
  os.flags(flags);
}

void write_energy_csv(std::ostream& os, const RunReport& report) {
  os << "n,t,energy\n";
  const auto flags = os.flags();
  os << std::setprecision(17);
  for (std::size_t n = 0; n < report.energy.size(); ++n) {
    os << n << ',' << n * report.dt << ',' << report.energy[n] << '\n';
  }
  os.flags(flags);
}

}  // namespace emhd
