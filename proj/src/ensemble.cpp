#include "emhd/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace emhd {

void EnsembleConfig::validate() const {
  if (J < 1) throw std::invalid_argument("EnsembleConfig: J must be at least 1");
  if (members.size() != static_cast<std::size_t>(J)) {
    throw std::invalid_argument("EnsembleConfig: expected " + std::to_string(J) + " member parameter pairs, got " +
                                std::to_string(members.size()));
  }
  for (std::size_t j = 0; j < members.size(); ++j) {
    if (!(members[j].nu > 0.0) || !(members[j].nu_m > 0.0)) {
      throw std::invalid_argument("EnsembleConfig: member " + std::to_string(j + 1) +
                                  " has a nonpositive viscosity");
    }
  }
  if (!(s >= 0.0)) throw std::invalid_argument("EnsembleConfig: coupling number s must be nonnegative");
  if (!(eps >= 0.0)) throw std::invalid_argument("EnsembleConfig: perturbation eps must be nonnegative");
  if (!(dt > 0.0)) throw std::invalid_argument("EnsembleConfig: dt must be positive");
  if (!(T > 0.0)) throw std::invalid_argument("EnsembleConfig: T must be positive");
  if (!(mu >= 0.0)) throw std::invalid_argument("EnsembleConfig: mu must be nonnegative");
}

int EnsembleConfig::step_count() const {
  return std::max(1, static_cast<int>(std::lround(T / dt)));
}

ElsasserFields elsasser_from_primitive(std::span<const double> u, std::span<const double> B, double s) {
  if (!(s >= 0.0)) throw std::invalid_argument("elsasser_from_primitive: s must be nonnegative");
  if (u.size() != B.size()) throw std::invalid_argument("elsasser_from_primitive: length mismatch");
  const double rs = std::sqrt(s);
  ElsasserFields out{std::vector<double>(u.size()), std::vector<double>(u.size())};
  for (std::size_t i = 0; i < u.size(); ++i) {
    out.v[i] = u[i] + rs * B[i];
    out.w[i] = u[i] - rs * B[i];
  }
  return out;
}

ElsasserPoint elsasser_from_primitive(const Vec2& u, const Vec2& B, double s) {
  if (!(s >= 0.0)) throw std::invalid_argument("elsasser_from_primitive: s must be nonnegative");
  const double rs = std::sqrt(s);
  return {u + B * rs, u - B * rs};
}

PrimitiveFields primitive_from_elsasser(std::span<const double> v, std::span<const double> w, double s) {
  if (!(s >= 0.0)) throw std::invalid_argument("primitive_from_elsasser: s must be nonnegative");
  if (v.size() != w.size()) throw std::invalid_argument("primitive_from_elsasser: length mismatch");
  PrimitiveFields out{std::vector<double>(v.size()), std::vector<double>(v.size(), 0.0)};
  if (s == 0.0) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] != w[i]) {
        throw DegenerateCouplingError("primitive_from_elsasser: s = 0 with v != w leaves B undetermined");
      }
      out.u[i] = v[i];
    }
    return out;
  }
  const double rs = std::sqrt(s);
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.u[i] = 0.5 * (v[i] + w[i]);
    out.B[i] = (v[i] - w[i]) / (2.0 * rs);
  }
  return out;
}

FamilyStatistics family_statistics(const std::vector<std::vector<double>>& members) {
  if (members.empty()) throw std::invalid_argument("family_statistics: empty family");
  const std::size_t n = members.front().size();
  for (const auto& m : members) {
    if (m.size() != n) throw std::invalid_argument("family_statistics: members differ in length");
  }
  FamilyStatistics st;
  st.mean.assign(n, 0.0);
  for (const auto& m : members) {
    for (std::size_t i = 0; i < n; ++i) st.mean[i] += m[i];
  }
  const double inv = 1.0 / static_cast<double>(members.size());
  for (double& x : st.mean) x *= inv;
  st.fluctuations.reserve(members.size());
  for (const auto& m : members) {
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = m[i] - st.mean[i];
    st.fluctuations.push_back(std::move(f));
  }
  return st;
}

void EnsembleState::refresh() {
  v_stats = family_statistics(v);
  w_stats = family_statistics(w);
}

namespace {

double max_deviation(const FamilyStatistics& a, const FamilyStatistics& b) {
  if (a.mean.size() != b.mean.size() || a.fluctuations.size() != b.fluctuations.size()) {
    return std::numeric_limits<double>::infinity();
  }
  double d = 0.0;
  for (std::size_t i = 0; i < a.mean.size(); ++i) d = std::max(d, std::abs(a.mean[i] - b.mean[i]));
  for (std::size_t j = 0; j < a.fluctuations.size(); ++j) {
    if (a.fluctuations[j].size() != b.fluctuations[j].size()) return std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.fluctuations[j].size(); ++i) {
      d = std::max(d, std::abs(a.fluctuations[j][i] - b.fluctuations[j][i]));
    }
  }
  return d;
}

}  // namespace

double EnsembleState::cache_deviation() const {
  return std::max(max_deviation(v_stats, family_statistics(v)), max_deviation(w_stats, family_statistics(w)));
}

EnsembleStatistics ensemble_stats(const EnsembleState& state) {
  FamilyStatistics sv = family_statistics(state.v);
  FamilyStatistics sw = family_statistics(state.w);
  return {std::move(sv.mean), std::move(sw.mean), std::move(sv.fluctuations), std::move(sw.fluctuations)};
}

ViscosityStatistics viscosity_stats(const std::vector<MemberParams>& members) {
  if (members.empty()) throw std::invalid_argument("viscosity_stats: empty ensemble");
  ViscosityStatistics st;
  for (const auto& m : members) {
    st.nu_bar += m.nu;
    st.nu_m_bar += m.nu_m;
  }
  st.nu_bar /= static_cast<double>(members.size());
  st.nu_m_bar /= static_cast<double>(members.size());
  for (std::size_t j = 0; j < members.size(); ++j) {
    const double nf = members[j].nu - st.nu_bar;
    const double mf = members[j].nu_m - st.nu_m_bar;
    st.nu_fluct.push_back(nf);
    st.nu_m_fluct.push_back(mf);
    const double a =
        st.nu_bar + st.nu_m_bar - std::abs(members[j].nu - members[j].nu_m) - std::abs(nf + mf);
    st.alpha.push_back(a);
    if (!(a > 0.0)) st.flagged.push_back(static_cast<int>(j));
  }
  return st;
}

std::vector<MemberParams> sample_viscosities(const ViscosityRanges& r, int J, std::uint64_t seed,
                                             bool deterministic_grid) {
  if (J < 1) throw std::invalid_argument("sample_viscosities: J must be at least 1");
  if (!(r.nu_lo <= r.nu_hi) || !(r.nu_m_lo <= r.nu_m_hi)) {
    throw std::invalid_argument("sample_viscosities: viscosity intervals must be nonempty");
  }
  if (!(r.nu_lo > 0.0) || !(r.nu_m_lo > 0.0)) {
    throw std::invalid_argument("sample_viscosities: viscosities must be positive");
  }
  std::vector<MemberParams> out;
  out.reserve(static_cast<std::size_t>(J));
  if (deterministic_grid) {
    int a = 1;
    for (int d = 1; d * d <= J; ++d) {
      if (J % d == 0) a = d;
    }
    const int b = J / a;
    for (int i = 0; i < a; ++i) {
      for (int k = 0; k < b; ++k) {
        const double nu = r.nu_lo + (r.nu_hi - r.nu_lo) * (i + 0.5) / a;
        const double nu_m = r.nu_m_lo + (r.nu_m_hi - r.nu_m_lo) * (k + 0.5) / b;
        out.push_back({nu, nu_m});
      }
    }
    return out;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dnu(r.nu_lo, r.nu_hi);
  std::uniform_real_distribution<double> dnm(r.nu_m_lo, r.nu_m_hi);
  // A degenerate interval still consumes its draw so both streams stay aligned.
  for (int j = 0; j < J; ++j) {
    const double u_nu = dnu(rng);
    const double u_nm = dnm(rng);
    const double nu = r.nu_lo == r.nu_hi ? r.nu_lo : u_nu;
    const double nu_m = r.nu_m_lo == r.nu_m_hi ? r.nu_m_lo : u_nm;
    out.push_back({nu, nu_m});
  }
  return out;
}

QuadratureField eddy_viscosity_at_quadrature(const FeSpace& space,
                                             const std::vector<std::vector<double>>& fluctuations, double mu,
                                             double dt) {
  if (!(mu >= 0.0) || !(dt > 0.0)) throw std::invalid_argument("eddy_viscosity_at_quadrature: need mu >= 0, dt > 0");
  QuadratureField field = QuadratureField::constant(space.cell_count(), 0.0);
  for (const auto& z : fluctuations) {
    const std::vector<Vec2> vals = values_at_quadrature(space, z);
    for (std::size_t i = 0; i < vals.size(); ++i) {
      field.values[i] = std::max(field.values[i], norm(vals[i]));
    }
  }
  for (double& x : field.values) x = mu * dt * x * x;
  return field;
}

double perturbation_factor(int member_number, double eps) {
  if (member_number < 1) throw std::invalid_argument("perturbation_factor: member numbers start at 1");
  const double sign = (member_number % 2 == 1) ? 1.0 : -1.0;
  const int k = (member_number + 1) / 2;
  return 1.0 + sign * k * eps / 5.0;
}

}  // namespace emhd
