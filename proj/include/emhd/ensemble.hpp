#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "emhd/assembly.hpp"
#include "emhd/fe_space.hpp"
#include "emhd/geometry.hpp"

namespace emhd {

/// Kinematic viscosity and magnetic diffusivity of one ensemble member.
struct MemberParams {
  double nu = 0.0;
  double nu_m = 0.0;
};

struct EnsembleConfig {
  int J = 1;
  double s = 0.0;    // coupling number
  double mu = 1.0;   // eddy-viscosity tuning parameter
  double dt = 0.0;
  double T = 0.0;
  double eps = 0.0;  // perturbation of initial/boundary data
  std::vector<MemberParams> members;
  std::uint64_t rng_seed = 0;

  /// Throws std::invalid_argument on J < 1, members.size() != J, a
  /// nonpositive viscosity, s < 0, eps < 0, dt <= 0 or T <= 0.
  void validate() const;
  /// M = round(T / dt), at least one step.
  int step_count() const;
};

class DegenerateCouplingError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Elsässer variables: v = u + sqrt(s) B, w = u - sqrt(s) B.
struct ElsasserFields {
  std::vector<double> v;
  std::vector<double> w;
};
struct PrimitiveFields {
  std::vector<double> u;
  std::vector<double> B;
};

ElsasserFields elsasser_from_primitive(std::span<const double> u, std::span<const double> B, double s);
/// u = (v + w) / 2, B = (v - w) / (2 sqrt(s)). With s = 0 the magnetic field
/// is only recoverable (as zero) when v == w; otherwise DegenerateCouplingError.
PrimitiveFields primitive_from_elsasser(std::span<const double> v, std::span<const double> w, double s);

struct ElsasserPoint {
  Vec2 v;
  Vec2 w;
};
ElsasserPoint elsasser_from_primitive(const Vec2& u, const Vec2& B, double s);

/// Ensemble mean and fluctuations of a family of coefficient vectors.
struct FamilyStatistics {
  std::vector<double> mean;
  std::vector<std::vector<double>> fluctuations;
};
FamilyStatistics family_statistics(const std::vector<std::vector<double>>& members);

/// Per-member coefficient vectors at time level `step`, with cached ensemble
/// means and fluctuations. Call refresh() after mutating member fields.
struct EnsembleState {
  std::vector<std::vector<double>> v, w, q, r;
  int step = 0;
  FamilyStatistics v_stats;
  FamilyStatistics w_stats;

  int members() const { return static_cast<int>(v.size()); }
  void refresh();
  /// Largest deviation between the caches and freshly computed statistics.
  double cache_deviation() const;
};

struct EnsembleStatistics {
  std::vector<double> mean_v, mean_w;
  std::vector<std::vector<double>> fluct_v, fluct_w;
};
EnsembleStatistics ensemble_stats(const EnsembleState& state);

struct ViscosityStatistics {
  double nu_bar = 0.0;
  double nu_m_bar = 0.0;
  std::vector<double> nu_fluct;
  std::vector<double> nu_m_fluct;
  /// alpha_j = nu_bar + nu_m_bar - |nu_j - nu_m_j| - |nu'_j + nu'_m_j|
  std::vector<double> alpha;
  /// Members with alpha_j <= 0.
  std::vector<int> flagged;
};
ViscosityStatistics viscosity_stats(const std::vector<MemberParams>& members);

struct ViscosityRanges {
  double nu_lo = 0.0, nu_hi = 0.0;
  double nu_m_lo = 0.0, nu_m_hi = 0.0;
};

/// J pairs drawn i.i.d. uniform on the rectangle (seeded mt19937_64), or with
/// deterministic_grid the cell centers of an a x b grid with a * b = J and a
/// the largest divisor of J not exceeding sqrt(J) (a along nu). A degenerate
/// interval [a, a] gives a to every member; lo > hi or a nonpositive lower
/// bound throws std::invalid_argument.
std::vector<MemberParams> sample_viscosities(const ViscosityRanges& ranges, int J, std::uint64_t seed,
                                             bool deterministic_grid);

/// nu_T = mu * dt * (max_j |z'_j|)^2 at each quadrature point.
QuadratureField eddy_viscosity_at_quadrature(const FeSpace& space,
                                             const std::vector<std::vector<double>>& fluctuations, double mu,
                                             double dt);

/// c_j = 1 + (-1)^(j+1) ceil(j/2) eps / 5 for the 1-based member number j.
double perturbation_factor(int member_number, double eps);

}  // namespace emhd
