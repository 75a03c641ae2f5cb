#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "emhd/config.hpp"
#include "emhd/experiments.hpp"
#include "emhd/mms.hpp"

namespace fs = std::filesystem;
using namespace emhd;

namespace {

struct Globals {
  std::string config_path;
  std::string out_dir = "emhd_out";
  std::optional<std::uint64_t> seed;
  bool deterministic_grid = false;
  bool paper_scale = false;
};

nlohmann::json load(const Globals& g) {
  return g.config_path.empty() ? nlohmann::json::object() : load_config_file(g.config_path);
}

fs::path out_file(const Globals& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return fs::path(g.out_dir) / name;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

template <class T>
T json_or(const nlohmann::json& cfg, const char* key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

int mesh_n_or(const nlohmann::json& cfg, int fallback) {
  if (!cfg.contains("mesh")) return fallback;
  return json_or(cfg.at("mesh"), "n", fallback);
}

StudySettings study_settings(const Globals& g, const nlohmann::json& cfg, int sample, double default_eps) {
  StudySettings st;
  st.eps = default_eps;
  if (sample == 2) st.ranges = {0.009, 0.011, 0.0009, 0.0011};
  st = apply_study_config(cfg, st);
  if (g.seed) st.seed = *g.seed;
  if (g.deterministic_grid) st.deterministic_grid = true;
  return st;
}

void print_table(const std::string& title, const RateTable& table) {
  std::printf("%s\n%-14s %-12s %-8s %-12s %-8s\n", title.c_str(), "h_or_dt", "err_v", "rate_v", "err_w", "rate_w");
  for (const auto& r : table.rows) {
    std::printf("%-14.6g %-12.4e %-8s %-12.4e %-8s\n", r.step, r.err_v,
                r.rate_v ? std::to_string(*r.rate_v).substr(0, 6).c_str() : "", r.err_w,
                r.rate_w ? std::to_string(*r.rate_w).substr(0, 6).c_str() : "");
  }
}

// Forcing correctness gate run before every manufactured-solution study.
double mms_gate(const StudySettings& st, std::uint64_t seed, bool verbose) {
  const EnsembleConfig cfg = make_config(st, 1.0, 1.0);
  const MmsProblem problem(st.eps, cfg.members);
  std::mt19937_64 rng(seed);
  std::vector<int> all(static_cast<std::size_t>(cfg.J)), picked;
  std::iota(all.begin(), all.end(), 0);
  std::sample(all.begin(), all.end(), std::back_inserter(picked), 3, rng);
  double worst = 0.0;
  for (int j : picked) {
    const double r = mms_fd_residual(problem, cfg.members[static_cast<std::size_t>(j)], j, 100, rng());
    if (verbose) std::printf("member %d (nu=%.6g, nu_m=%.6g): max FD residual %.3e\n", j + 1, cfg.members[j].nu,
                             cfg.members[j].nu_m, r);
    worst = std::max(worst, r);
  }
  return worst;
}

void require_gate(const StudySettings& st) {
  const double r = mms_gate(st, st.seed, false);
  if (!(r <= 1e-10)) {
    throw std::runtime_error("manufactured forcing failed the finite-difference gate (residual " +
                             std::to_string(r) + ")");
  }
}

void write_study(const Globals& g, const std::string& stem, const ConvergenceStudy& study) {
  auto os = open_out(out_file(g, stem + ".csv"));
  write_rate_csv(os, study.table);
  auto alt = open_out(out_file(g, stem + "_alternate.csv"));
  write_rate_csv(alt, study.alternate);
  print_table(stem, study.table);
  print_table(stem + " (alternate reference)", study.alternate);
  std::printf("max divergence over levels n >= 1: %.3e\n", study.max_divergence);
}

std::vector<int> int_list_or(const nlohmann::json& cfg, const char* key, std::vector<int> fallback) {
  return json_or(cfg, key, fallback);
}

void write_vtk(const Globals& g, const std::string& name, const FieldRun& fr, double s, const std::string& title) {
  const PrimitiveAverage avg = primitive_average(fr.result.final_state, s);
  auto os = open_out(out_file(g, name));
  write_field_vtk(os, fr.stepper->velocity_space(), avg.u, avg.B, title);
}

void report_run(const std::string& label, const RunResult& r) {
  const auto& rep = r.report;
  const double div = rep.max_divergence.size() > 1
                         ? *std::max_element(rep.max_divergence.begin() + 1, rep.max_divergence.end())
                         : 0.0;
  const double emax = rep.energy.empty() ? 0.0 : *std::max_element(rep.energy.begin(), rep.energy.end());
  std::printf("%s: %d steps, final energy %.6e, max energy %.6e, max divergence %.3e%s%s\n", label.c_str(),
              rep.steps, rep.energy.empty() ? 0.0 : rep.energy.back(), emax, div, r.failure ? ", FAILED: " : "",
              r.failure ? r.failure->c_str() : "");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensemble Elsasser MHD solver experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", g.out_dir, "output directory")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "random seed for viscosity sampling");
  app.add_flag("--deterministic-grid", g.deterministic_grid, "use grid-placed instead of random viscosities");
  app.add_flag("--paper-scale", g.paper_scale, "restore the full-resolution settings");

  int sample = 1;
  double eps = 0.0;
  auto add_study_opts = [&](CLI::App* sub) {
    sub->add_option("--sample", sample, "viscosity sample: 1 = [0.009,0.011]x[0.09,0.11], 2 = x[0.0009,0.0011]")
        ->check(CLI::IsMember({1, 2}));
    sub->add_option("--eps", eps, "perturbation parameter");
  };
  auto* space = app.add_subcommand("converge-space", "spatial convergence table");
  add_study_opts(space);
  auto* time = app.add_subcommand("converge-time", "temporal convergence table");
  add_study_opts(time);
  auto* energy = app.add_subcommand("energy", "energy dissipation test");
  auto* cavity = app.add_subcommand("cavity", "regularized lid-driven cavity");
  auto* channel = app.add_subcommand("channel", "channel flow over a step");
  auto* validate = app.add_subcommand("validate-mms", "finite-difference check of the manufactured forcing");
  add_study_opts(validate);

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) g.seed = seed;

  try {
    const nlohmann::json cfg = load(g);
    const bool eps_given = (space->count("--eps") + time->count("--eps") + validate->count("--eps")) > 0;

    if (*space) {
      StudySettings st = study_settings(g, cfg, sample, 0.0);
      if (eps_given) st.eps = eps;
      require_gate(st);
      std::vector<int> subs = g.paper_scale ? std::vector<int>{4, 8, 16, 32, 64} : std::vector<int>{4, 8, 16, 32};
      subs = int_list_or(cfg, "subdivisions", subs);
      const double T = json_or(cfg, "T", 0.001);
      const int steps = json_or(cfg, "steps", 8);
      write_study(g, "spatial_sample" + std::to_string(sample), run_spatial_convergence(st, subs, T, steps));
    } else if (*time) {
      StudySettings st = study_settings(g, cfg, sample, 0.0);
      if (eps_given) st.eps = eps;
      require_gate(st);
      const int n = mesh_n_or(cfg, g.paper_scale ? 64 : 32);
      std::vector<int> counts =
          g.paper_scale ? std::vector<int>{2, 4, 8, 16, 32, 64, 128} : std::vector<int>{2, 4, 8, 16, 32, 64};
      counts = int_list_or(cfg, "step_counts", counts);
      const double T = json_or(cfg, "T", 1.0);
      write_study(g, "temporal_sample" + std::to_string(sample), run_temporal_convergence(st, n, counts, T));
    } else if (*energy) {
      const StudySettings st = study_settings(g, cfg, 1, 0.01);
      const int n = mesh_n_or(cfg, 32);
      const EnergyTest e = run_energy_test(st, n, json_or(cfg, "dt", 0.05), json_or(cfg, "T", 1.0));
      auto os = open_out(out_file(g, "energy.csv"));
      write_energy_csv(os, e.report);
      std::printf("E^0 = %.6e, E^M = %.6e, max relative increase %.3e, dissipative: %s\n", e.report.energy.front(),
                  e.report.energy.back(), e.max_relative_increase, e.dissipative ? "yes" : "no");
      for (std::size_t j = 0; j < e.stability.lhs.size(); ++j) {
        std::printf("member %zu: stability lhs %.6e <= rhs %.6e : %s\n", j + 1, e.stability.lhs[j],
                    e.stability.rhs[j], e.stability.member_holds[j] ? "holds" : "violated");
      }
      if (e.failure) throw std::runtime_error(*e.failure);
      return e.dissipative && e.stability.holds ? 0 : 2;
    } else if (*cavity) {
      CavitySettings st;
      if (g.paper_scale) {
        st.re_mean = 15000.0;
        st.T = 600.0;
        st.h = 1.0 / 64.0;
      }
      st = apply_cavity_config(cfg, st);
      if (g.seed) st.seed = *g.seed;
      if (g.deterministic_grid) st.deterministic_grid = true;
      const FieldRun fr = run_cavity(st);
      report_run("cavity", fr.result);
      auto os = open_out(out_file(g, "cavity_energy.csv"));
      write_energy_csv(os, fr.result.report);
      write_vtk(g, "cavity.vtk", fr, st.s, "cavity ensemble average");
      if (fr.result.failure) return 2;
    } else if (*channel) {
      ChannelSettings st;
      if (g.paper_scale) {
        st.T = 40.0;
        st.h = 0.25;
      }
      st = apply_channel_config(cfg, st);
      if (g.seed) st.seed = *g.seed;
      if (g.deterministic_grid) st.deterministic_grid = true;
      const ChannelStudy cs = run_step_channel(st);
      auto os = open_out(out_file(g, "channel_distance.csv"));
      os << "eps,velocity_l2_distance,magnetic_l2_distance\n";
      bool failed = cs.usual.result.failure.has_value();
      report_run("usual", cs.usual.result);
      write_vtk(g, "channel_usual.vtk", cs.usual, st.s, "channel single run");
      for (std::size_t k = 0; k < cs.eps.size(); ++k) {
        os << cs.eps[k] << ',' << cs.velocity_distance[k] << ',' << cs.magnetic_distance[k] << '\n';
        report_run("eps=" + std::to_string(cs.eps[k]), cs.ensembles[k].result);
        std::printf("  distance to single run: velocity %.6e, magnetic %.6e\n", cs.velocity_distance[k],
                    cs.magnetic_distance[k]);
        write_vtk(g, "channel_eps" + std::to_string(k) + ".vtk", cs.ensembles[k], st.s,
                  "channel ensemble average eps=" + std::to_string(cs.eps[k]));
        failed = failed || cs.ensembles[k].result.failure.has_value();
      }
      if (failed) return 2;
    } else if (*validate) {
      StudySettings st = study_settings(g, cfg, sample, 0.0);
      if (eps_given) st.eps = eps;
      const double r = mms_gate(st, st.seed, true);
      std::printf("largest residual %.3e (gate 1e-10): %s\n", r, r <= 1e-10 ? "PASS" : "FAIL");
      return r <= 1e-10 ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
