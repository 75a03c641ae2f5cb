#pragma once

#include <string>

#include <json.hpp>

#include "emhd/experiments.hpp"

namespace emhd {

// JSON experiment configuration. Recognized keys (all optional):
//   J, s, mu, eps, dt, T, seed, deterministic_grid, reference
//   ("interpolant" | "exact"), viscosity {nu: [lo, hi], nu_m: [lo, hi]},
//   members [[nu, nu_m], ...], mesh {kind, n | h}, subdivisions [..],
//   steps, step_counts [..], eps_list [..], re_mean, nu_m_range [lo, hi],
//   shared_mean_parameters.
// Unknown keys are rejected so that misspellings cannot pass silently.

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json load_config_file(const std::string& path);

/// Checks that every top-level key is recognized; throws ConfigError.
void check_config_keys(const nlohmann::json& cfg);

StudySettings apply_study_config(const nlohmann::json& cfg, StudySettings base);
CavitySettings apply_cavity_config(const nlohmann::json& cfg, CavitySettings base);
ChannelSettings apply_channel_config(const nlohmann::json& cfg, ChannelSettings base);

ErrorReference parse_reference(const std::string& name);

}  // namespace emhd
