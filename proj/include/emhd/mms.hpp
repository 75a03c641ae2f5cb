#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "emhd/assembly.hpp"
#include "emhd/ensemble.hpp"
#include "emhd/geometry.hpp"
#include "emhd/stepper.hpp"

namespace emhd {

/// Manufactured Elsässer fields on the unit square, with a = 1 + e^t:
///   v = (cos y + a sin y, sin x + a cos x)
///   w = (cos y - a sin y, sin x - a cos x)
///   q = r = a sin(x + y)
/// Member j uses c_j v and c_j w with c_j = perturbation_factor(j + 1, eps);
/// pressures are not scaled.
namespace mms {

Vec2 v(double x, double y, double t);
Vec2 w(double x, double y, double t);
double q(double x, double y, double t);
Mat2 grad_v(double x, double y, double t);
Mat2 grad_w(double x, double y, double t);
Vec2 v_t(double x, double y, double t);
Vec2 w_t(double x, double y, double t);
Vec2 grad_q(double x, double y, double t);

struct MemberForcing {
  Vec2 f1;
  Vec2 f2;
};
/// f1 = v_t + (w.grad) v - (nu + nu_m)/2 lap v - (nu - nu_m)/2 lap w + grad q
/// for the scaled member fields, and f2 with the roles of v and w swapped.
MemberForcing forcing(double c, const MemberParams& p, double x, double y, double t);

}  // namespace mms

/// Member-scaled manufactured solution bound to an ensemble configuration.
class MmsProblem {
 public:
  MmsProblem(double eps, std::vector<MemberParams> members);

  double scale(int j) const { return scales_.at(static_cast<std::size_t>(j)); }
  Vec2 v(int j, double x, double y, double t) const { return mms::v(x, y, t) * scale(j); }
  Vec2 w(int j, double x, double y, double t) const { return mms::w(x, y, t) * scale(j); }
  mms::MemberForcing forcing(int j, double x, double y, double t) const;

  /// Exact data, exact Dirichlet data and the matching forcing.
  ProblemDefinition definition() const;
  /// Same initial data with zero Dirichlet data and zero forcing.
  ProblemDefinition unforced_homogeneous_definition() const;

 private:
  std::vector<double> scales_;
  std::vector<MemberParams> members_;
};

/// Largest pointwise residual of both momentum equations for member j at
/// `points` uniformly drawn (x, y, t) in [0, 1]^2 x [0, 1], with every
/// derivative of the exact fields taken by 8th-order central differences of
/// step `fd_step`.
double mms_fd_residual(const MmsProblem& problem, const MemberParams& params, int j, int points,
                       std::uint64_t seed, double fd_step = 0.05);

/// Reference field against which the discrete ensemble mean is measured.
enum class ErrorReference { Interpolant, Exact };

/// Accumulates ||<z_h>^n - z(t^n)||_{2,1} = sqrt(dt sum_{n=1}^{M} ||e^n||_{H1}^2)
/// for the ensemble means of v and w.
class Norm21Accumulator {
 public:
  using FieldAt = std::function<Vec2(double x, double y, double t)>;
  using GradientAt = std::function<Mat2(double x, double y, double t)>;

  Norm21Accumulator(const FeSpace& space, double dt, ErrorReference reference, FieldAt v, GradientAt grad_v,
                    FieldAt w, GradientAt grad_w);

  /// Adds level n (ignored for n = 0).
  void add(int n, std::span<const double> mean_v, std::span<const double> mean_w);
  double error_v() const;
  double error_w() const;

  /// H1 error squared of one field at time t.
  double h1_error_sq(std::span<const double> coeffs, const FieldAt& f, const GradientAt& g, double t) const;

 private:
  const FeSpace& space_;
  double dt_;
  ErrorReference reference_;
  FieldAt v_, w_;
  GradientAt grad_v_, grad_w_;
  double sum_v_ = 0.0;
  double sum_w_ = 0.0;
};

/// sqrt(dt sum_n ||e^n||_{H1}^2) for precomputed per-level H1 errors e^1..e^M.
double error_norm_21(std::span<const double> h1_errors, double dt);

}  // namespace emhd
