#include "emhd/mms.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace emhd {
namespace mms {

namespace {
double amp(double t) { return 1.0 + std::exp(t); }
}  // namespace

Vec2 v(double x, double y, double t) {
  const double a = amp(t);
  return {std::cos(y) + a * std::sin(y), std::sin(x) + a * std::cos(x)};
}

Vec2 w(double x, double y, double t) {
  const double a = amp(t);
  return {std::cos(y) - a * std::sin(y), std::sin(x) - a * std::cos(x)};
}

double q(double x, double y, double t) { return amp(t) * std::sin(x + y); }

Mat2 grad_v(double x, double y, double t) {
  const double a = amp(t);
  return {0.0, -std::sin(y) + a * std::cos(y), std::cos(x) - a * std::sin(x), 0.0};
}

Mat2 grad_w(double x, double y, double t) {
  const double a = amp(t);
  return {0.0, -std::sin(y) - a * std::cos(y), std::cos(x) + a * std::sin(x), 0.0};
}

Vec2 v_t(double x, double y, double t) { return {std::exp(t) * std::sin(y), std::exp(t) * std::cos(x)}; }
Vec2 w_t(double x, double y, double t) { return v_t(x, y, t) * -1.0; }

Vec2 grad_q(double x, double y, double t) {
  const double g = amp(t) * std::cos(x + y);
  return {g, g};
}

namespace {
// (b . grad) z with row i of G the gradient of z_i.
Vec2 advect(const Mat2& G, const Vec2& b) { return {G.xx * b.x + G.xy * b.y, G.yx * b.x + G.yy * b.y}; }
}  // namespace

MemberForcing forcing(double c, const MemberParams& p, double x, double y, double t) {
  // Both base fields satisfy lap z = -z.
  const Vec2 vv = v(x, y, t);
  const Vec2 ww = w(x, y, t);
  const double sum = 0.5 * (p.nu + p.nu_m);
  const double diff = 0.5 * (p.nu - p.nu_m);
  const Vec2 gq = grad_q(x, y, t);
  MemberForcing out;
  out.f1 = v_t(x, y, t) * c + advect(grad_v(x, y, t), ww) * (c * c) + vv * (sum * c) + ww * (diff * c) + gq;
  out.f2 = w_t(x, y, t) * c + advect(grad_w(x, y, t), vv) * (c * c) + ww * (sum * c) + vv * (diff * c) + gq;
  return out;
}

}  // namespace mms

MmsProblem::MmsProblem(double eps, std::vector<MemberParams> members) : members_(std::move(members)) {
  if (!(eps >= 0.0)) throw std::invalid_argument("MmsProblem: eps must be nonnegative");
  for (std::size_t j = 0; j < members_.size(); ++j) {
    scales_.push_back(perturbation_factor(static_cast<int>(j) + 1, eps));
  }
}

mms::MemberForcing MmsProblem::forcing(int j, double x, double y, double t) const {
  return mms::forcing(scale(j), members_.at(static_cast<std::size_t>(j)), x, y, t);
}

ProblemDefinition MmsProblem::definition() const {
  ProblemDefinition p;
  p.v0 = [this](int j, double x, double y, double t) { return v(j, x, y, t); };
  p.w0 = [this](int j, double x, double y, double t) { return w(j, x, y, t); };
  p.v_boundary = p.v0;
  p.w_boundary = p.w0;
  p.f1 = [this](int j, double x, double y, double t) { return forcing(j, x, y, t).f1; };
  p.f2 = [this](int j, double x, double y, double t) { return forcing(j, x, y, t).f2; };
  return p;
}

ProblemDefinition MmsProblem::unforced_homogeneous_definition() const {
  ProblemDefinition p;
  p.v0 = [this](int j, double x, double y, double t) { return v(j, x, y, t); };
  p.w0 = [this](int j, double x, double y, double t) { return w(j, x, y, t); };
  p.v_boundary = [](int, double, double, double) { return Vec2{}; };
  p.w_boundary = p.v_boundary;
  p.zero_forcing = true;
  return p;
}

Norm21Accumulator::Norm21Accumulator(const FeSpace& space, double dt, ErrorReference reference, FieldAt v,
                                     GradientAt grad_v, FieldAt w, GradientAt grad_w)
    : space_(space),
      dt_(dt),
      reference_(reference),
      v_(std::move(v)),
      w_(std::move(w)),
      grad_v_(std::move(grad_v)),
      grad_w_(std::move(grad_w)) {}

double Norm21Accumulator::h1_error_sq(std::span<const double> coeffs, const FieldAt& f, const GradientAt& g,
                                      double t) const {
  if (reference_ == ErrorReference::Interpolant) {
    const std::vector<double> ref = interpolate(space_, VectorFunction([&](double x, double y) { return f(x, y, t); }));
    std::vector<double> e(coeffs.begin(), coeffs.end());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] -= ref[i];
    const double l2 = norm_l2(space_, e);
    const double h1 = h1_seminorm(space_, e);
    return l2 * l2 + h1 * h1;
  }
  return error_against(space_, coeffs, VectorFunction([&](double x, double y) { return f(x, y, t); }),
                       GradientFunction([&](double x, double y) { return g(x, y, t); }))
      .h1_sq();
}

void Norm21Accumulator::add(int n, std::span<const double> mean_v, std::span<const double> mean_w) {
  if (n <= 0) return;
  const double t = n * dt_;
  sum_v_ += dt_ * h1_error_sq(mean_v, v_, grad_v_, t);
  sum_w_ += dt_ * h1_error_sq(mean_w, w_, grad_w_, t);
}

double Norm21Accumulator::error_v() const { return std::sqrt(sum_v_); }
double Norm21Accumulator::error_w() const { return std::sqrt(sum_w_); }

namespace {

constexpr double kD1[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
constexpr double kD2[5] = {-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0};

template <class F>
auto first_diff(F&& f, double h) {
  auto acc = (f(1) - f(-1)) * kD1[0];
  for (int k = 2; k <= 4; ++k) acc = acc + (f(k) - f(-k)) * kD1[k - 1];
  return acc * (1.0 / h);
}

template <class F>
auto second_diff(F&& f, double h) {
  auto acc = f(0) * kD2[0];
  for (int k = 1; k <= 4; ++k) acc = acc + (f(k) + f(-k)) * kD2[k];
  return acc * (1.0 / (h * h));
}

}  // namespace

double mms_fd_residual(const MmsProblem& problem, const MemberParams& params, int j, int points,
                       std::uint64_t seed, double h) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double sum = 0.5 * (params.nu + params.nu_m);
  const double diff = 0.5 * (params.nu - params.nu_m);
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const double x = U(rng), y = U(rng), t = U(rng);
    auto V = [&](double a, double b, double c) { return problem.v(j, a, b, c); };
    auto W = [&](double a, double b, double c) { return problem.w(j, a, b, c); };
    auto Q = [&](double a, double b, double c) { return mms::q(a, b, c); };
    auto dt = [&](auto&& f) { return first_diff([&](int k) { return f(x, y, t + k * h); }, h); };
    auto dx = [&](auto&& f) { return first_diff([&](int k) { return f(x + k * h, y, t); }, h); };
    auto dy = [&](auto&& f) { return first_diff([&](int k) { return f(x, y + k * h, t); }, h); };
    auto lap = [&](auto&& f) {
      return second_diff([&](int k) { return f(x + k * h, y, t); }, h) +
             second_diff([&](int k) { return f(x, y + k * h, t); }, h);
    };
    const Vec2 v = V(x, y, t), w = W(x, y, t);
    const Vec2 gq{dx(Q), dy(Q)};
    const Vec2 lhs1 = dt(V) + dx(V) * w.x + dy(V) * w.y - lap(V) * sum - lap(W) * diff + gq;
    const Vec2 lhs2 = dt(W) + dx(W) * v.x + dy(W) * v.y - lap(W) * sum - lap(V) * diff + gq;
    const mms::MemberForcing f = problem.forcing(j, x, y, t);
    const Vec2 r1 = lhs1 - f.f1, r2 = lhs2 - f.f2;
    worst = std::max({worst, std::abs(r1.x), std::abs(r1.y), std::abs(r2.x), std::abs(r2.y)});
  }
  return worst;
}

double error_norm_21(std::span<const double> h1_errors, double dt) {
  double s = 0.0;
  for (double e : h1_errors) s += e * e;
  return std::sqrt(dt * s);
}

}  // namespace emhd
