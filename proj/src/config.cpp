#include "emhd/config.hpp"

#include <array>
#include <fstream>
#include <set>

namespace emhd {

using nlohmann::json;

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{"J",          "s",          "mu",          "eps",
                                          "dt",         "T",          "seed",        "deterministic_grid",
                                          "reference",  "viscosity",  "members",     "mesh",
                                          "subdivisions", "steps",    "step_counts", "eps_list",
                                          "re_mean",    "nu_m_range", "shared_mean_parameters"};
  return keys;
}

template <class T>
void read(const json& cfg, const char* key, T& out) {
  if (!cfg.contains(key)) return;
  try {
    out = cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

std::array<double, 2> interval(const json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ConfigError("config key '" + key + "' must be a [lo, hi] pair of numbers");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

nlohmann::json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  if (!cfg.is_object()) throw ConfigError("config file " + path + " must hold a JSON object");
  check_config_keys(cfg);
  return cfg;
}

void check_config_keys(const nlohmann::json& cfg) {
  if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    if (!known_keys().count(it.key())) throw ConfigError("unknown config key '" + it.key() + "'");
  }
}

ErrorReference parse_reference(const std::string& name) {
  if (name == "interpolant") return ErrorReference::Interpolant;
  if (name == "exact") return ErrorReference::Exact;
  throw ConfigError("reference must be 'interpolant' or 'exact', got '" + name + "'");
}

StudySettings apply_study_config(const nlohmann::json& cfg, StudySettings st) {
  check_config_keys(cfg);
  read(cfg, "J", st.J);
  read(cfg, "s", st.s);
  read(cfg, "mu", st.mu);
  read(cfg, "eps", st.eps);
  read(cfg, "seed", st.seed);
  read(cfg, "deterministic_grid", st.deterministic_grid);
  if (cfg.contains("reference")) {
    std::string r;
    read(cfg, "reference", r);
    st.reference = parse_reference(r);
  }
  if (cfg.contains("viscosity")) {
    const json& v = cfg.at("viscosity");
    if (v.contains("nu")) {
      const auto [lo, hi] = interval(v.at("nu"), "viscosity.nu");
      st.ranges.nu_lo = lo;
      st.ranges.nu_hi = hi;
    }
    if (v.contains("nu_m")) {
      const auto [lo, hi] = interval(v.at("nu_m"), "viscosity.nu_m");
      st.ranges.nu_m_lo = lo;
      st.ranges.nu_m_hi = hi;
    }
  }
  if (cfg.contains("members")) {
    st.members.clear();
    for (const auto& m : cfg.at("members")) {
      const auto [nu, nu_m] = interval(m, "members[]");
      st.members.push_back({nu, nu_m});
    }
    if (!cfg.contains("J")) st.J = static_cast<int>(st.members.size());
    if (st.members.size() != static_cast<std::size_t>(st.J)) {
      throw ConfigError("config lists " + std::to_string(st.members.size()) + " members but J = " +
                        std::to_string(st.J));
    }
  }
  return st;
}

CavitySettings apply_cavity_config(const nlohmann::json& cfg, CavitySettings st) {
  check_config_keys(cfg);
  read(cfg, "J", st.J);
  read(cfg, "s", st.s);
  read(cfg, "mu", st.mu);
  read(cfg, "eps", st.eps);
  read(cfg, "dt", st.dt);
  read(cfg, "T", st.T);
  read(cfg, "seed", st.seed);
  read(cfg, "deterministic_grid", st.deterministic_grid);
  read(cfg, "re_mean", st.re_mean);
  if (cfg.contains("nu_m_range")) {
    const auto [lo, hi] = interval(cfg.at("nu_m_range"), "nu_m_range");
    st.nu_m_lo = lo;
    st.nu_m_hi = hi;
  }
  if (cfg.contains("mesh")) read(cfg.at("mesh"), "h", st.h);
  return st;
}

ChannelSettings apply_channel_config(const nlohmann::json& cfg, ChannelSettings st) {
  check_config_keys(cfg);
  read(cfg, "J", st.J);
  read(cfg, "s", st.s);
  read(cfg, "mu", st.mu);
  read(cfg, "dt", st.dt);
  read(cfg, "T", st.T);
  read(cfg, "seed", st.seed);
  read(cfg, "deterministic_grid", st.deterministic_grid);
  read(cfg, "eps_list", st.eps_list);
  read(cfg, "shared_mean_parameters", st.shared_mean_parameters);
  if (cfg.contains("viscosity")) {
    const json& v = cfg.at("viscosity");
    if (v.contains("nu")) {
      const auto [lo, hi] = interval(v.at("nu"), "viscosity.nu");
      st.ranges.nu_lo = lo;
      st.ranges.nu_hi = hi;
    }
    if (v.contains("nu_m")) {
      const auto [lo, hi] = interval(v.at("nu_m"), "viscosity.nu_m");
      st.ranges.nu_m_lo = lo;
      st.ranges.nu_m_hi = hi;
    }
  }
  if (cfg.contains("mesh")) read(cfg.at("mesh"), "h", st.h);
  return st;
}

}  // namespace emhd
