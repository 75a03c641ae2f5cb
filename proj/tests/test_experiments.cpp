#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "emhd/config.hpp"
#include "emhd/experiments.hpp"
#include "emhd/mms.hpp"
#include "oracle.hpp"

using namespace emhd;

namespace {

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

double l2(const std::vector<double>& a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

StudySettings small_study(int J) {
  StudySettings st;
  st.J = J;
  st.deterministic_grid = true;
  return st;
}

}  // namespace

TEST_CASE("manufactured fields") {
  const Vec2 v = mms::v(0.0, 0.0, 0.0);
  CHECK(v.x == 1.0);
  CHECK(v.y == 2.0);

  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double x = U(rng), y = U(rng), t = U(rng);
    const double a = 1.0 + std::exp(t);
    const Vec2 d = mms::v(x, y, t) - mms::w(x, y, t);
    CHECK(d.x == doctest::Approx(2.0 * a * std::sin(y)).epsilon(1e-14));
    CHECK(d.y == doctest::Approx(2.0 * a * std::cos(x)).epsilon(1e-14));
    for (const Mat2& g : {mms::grad_v(x, y, t), mms::grad_w(x, y, t)}) CHECK(std::abs(g.xx + g.yy) <= 1e-12);
    const Vec2 ov = oracle::exact_v(1.0, x, y, t);
    CHECK(mms::v(x, y, t).x == doctest::Approx(ov.x).epsilon(1e-15));
    CHECK(mms::q(x, y, t) == doctest::Approx(oracle::exact_q(x, y, t)).epsilon(1e-15));
  }

  const MmsProblem pb(0.01, {{0.01, 0.1}, {0.01, 0.1}});
  CHECK(pb.scale(0) == doctest::Approx(oracle::member_scale(1, 0.01)).epsilon(1e-15));
  CHECK(pb.scale(1) == doctest::Approx(oracle::member_scale(2, 0.01)).epsilon(1e-15));
  CHECK(pb.v(1, 0.3, 0.4, 0.5).x == doctest::Approx(0.998 * mms::v(0.3, 0.4, 0.5).x).epsilon(1e-15));
}

TEST_CASE("manufactured forcing satisfies both momentum equations") {
  const std::vector<MemberParams> members{{0.0095, 0.105}, {0.0107, 0.091}, {0.05, 0.05}, {1.0, 0.2}};
  for (double eps : {0.0, 0.01, 0.1}) {
    const MmsProblem pb(eps, members);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int j = 0; j < static_cast<int>(members.size()); ++j) {
      const auto forcing = [&](double x, double y, double t) { return pb.forcing(j, x, y, t); };
      double worst = 0.0;
      for (int i = 0; i < 40; ++i) {
        worst = std::max(worst, oracle::mms_residual(oracle::member_scale(j + 1, eps), members[j].nu,
                                                     members[j].nu_m, forcing, U(rng), U(rng), U(rng)));
      }
      CAPTURE(eps);
      CAPTURE(j);
      CHECK(worst <= 1e-10);
    }
  }
}

TEST_CASE("library finite-difference gate agrees") {
  const std::vector<MemberParams> members{{0.0095, 0.105}, {0.0107, 0.091}};
  const MmsProblem pb(0.01, members);
  for (int j = 0; j < 2; ++j) CHECK(mms_fd_residual(pb, members[j], j, 50, 11 + j) <= 1e-10);
}

TEST_CASE("forcing structure") {
  SUBCASE("equal diffusivities drop the cross Laplacian") {
    // With nu = nu_m only (nu + nu_m)/2 lap v survives; -lap v = v for the
    // trigonometric part, so f1 - f1(nu = 0) is nu * c * (cos y + a sin y, ...).
    const double x = 0.3, y = 0.7, t = 0.2, a = 1.0 + std::exp(t);
    const auto f = mms::forcing(1.0, {0.2, 0.2}, x, y, t).f1;
    const auto f0 = mms::forcing(1.0, {1e-300, 1e-300}, x, y, t).f1;
    CHECK(f.x - f0.x == doctest::Approx(0.2 * (std::cos(y) + a * std::sin(y))).epsilon(1e-12));
    CHECK(f.y - f0.y == doctest::Approx(0.2 * (std::sin(x) + a * std::cos(x))).epsilon(1e-12));
  }
  SUBCASE("forcing is member independent for equal parameters without perturbation") {
    const MmsProblem pb(0.0, std::vector<MemberParams>(5, MemberParams{0.01, 0.1}));
    for (int j = 1; j < 5; ++j) {
      const auto a = pb.forcing(0, 0.4, 0.6, 0.8), b = pb.forcing(j, 0.4, 0.6, 0.8);
      CHECK(a.f1 == b.f1);
      CHECK(a.f2 == b.f2);
    }
  }
}

TEST_CASE("discrete L2(H1) error norm") {
  CHECK(error_norm_21(std::vector<double>{}, 0.1) == 0.0);
  CHECK(error_norm_21(std::vector<double>{0.0, 0.0}, 0.1) == 0.0);
  CHECK(error_norm_21(std::vector<double>(4, 0.3), 0.25) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(error_norm_21(std::vector<double>(10, 0.3), 0.2) == doctest::Approx(std::sqrt(2.0) * 0.3).epsilon(1e-15));
  CHECK(error_norm_21(std::vector<double>{0.5}, 0.01) == doctest::Approx(0.05).epsilon(1e-15));

  const auto mesh = unit_square_sv_mesh(4);
  const FeSpace space = FeSpace::vector_p2(mesh);
  auto vi = [](double t) { return [t](double x, double y) { return mms::v(x, y, t); }; };
  auto wi = [](double t) { return [t](double x, double y) { return mms::w(x, y, t); }; };
  Norm21Accumulator acc(space, 0.1, ErrorReference::Interpolant, mms::v, mms::grad_v, mms::w, mms::grad_w);
  for (int n = 0; n <= 3; ++n) {
    acc.add(n, interpolate(space, VectorFunction(vi(0.1 * n))), interpolate(space, VectorFunction(wi(0.1 * n))));
  }
  CHECK(acc.error_v() == 0.0);
  CHECK(acc.error_w() == 0.0);

  Norm21Accumulator exact(space, 0.1, ErrorReference::Exact, mms::v, mms::grad_v, mms::w, mms::grad_w);
  const auto I1 = interpolate(space, VectorFunction(vi(0.1)));
  exact.add(1, I1, interpolate(space, VectorFunction(wi(0.1))));
  CHECK(exact.error_v() > 0.0);
  CHECK(exact.error_v() == doctest::Approx(std::sqrt(0.1 * exact.h1_error_sq(I1, mms::v, mms::grad_v, 0.1))));
  CHECK(exact.error_v() < 1e-2);
}

TEST_CASE("convergence rates") {
  CHECK(compute_rate(1.0741e-04, 2.7081e-05, 0.25, 0.125) == doctest::Approx(1.99).epsilon(0.003));
  CHECK(compute_rate(2.2419e-01, 1.0851e-01, 0.5, 0.25) == doctest::Approx(1.05).epsilon(0.003));
  CHECK(compute_rate(0.3, 0.3, 0.5, 0.25) == 0.0);
  CHECK(compute_rate(3e5, 7.5e4, 2.0, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(compute_rate(0.0, 1.0, 0.5, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(compute_rate(1.0, -1.0, 0.5, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(compute_rate(1.0, 1.0, 0.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(compute_rate(1.0, 1.0, 0.0, 0.5), std::invalid_argument);

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> U(0.01, 1.0), S(1e-6, 1e6);
  for (int i = 0; i < 100; ++i) {
    const double e1 = U(rng), e2 = U(rng), k = S(rng);
    CHECK(compute_rate(k * e1, k * e2, 0.5, 0.25) == doctest::Approx(compute_rate(e1, e2, 0.5, 0.25)).epsilon(1e-12));
  }
}

TEST_CASE("rate tables and CSV output") {
  RateTable t;
  t.add(0.25, 1e-2, 2e-2);
  t.add(0.125, 2.5e-3, 1e-2);
  REQUIRE(t.rows.size() == 2);
  CHECK_FALSE(t.rows[0].rate_v);
  CHECK(*t.rows[1].rate_v == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(*t.rows[1].rate_w == doctest::Approx(1.0).epsilon(1e-14));
  std::ostringstream os;
  write_rate_csv(os, t);
  const auto lines = lines_of(os.str());
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "h_or_dt,err_v,rate_v,err_w,rate_w");
  CHECK(lines[1] == "0.25,1.000000e-02,,2.000000e-02,");
  CHECK(lines[2] == "0.125,2.500000e-03,2.0000,1.000000e-02,1.0000");
}

TEST_CASE("configuration files") {
  const auto dir = std::filesystem::temp_directory_path() / "emhd_config_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "study.json").string();
  {
    std::ofstream out(path);
    out << R"({"eps": 0.01, "seed": 7, "reference": "exact", "viscosity": {"nu": [0.001, 0.002]},
              "members": [[0.01, 0.1], [0.02, 0.2]]})";
  }
  const auto cfg = load_config_file(path);
  const StudySettings st = apply_study_config(cfg, StudySettings{});
  CHECK(st.eps == 0.01);
  CHECK(st.seed == 7);
  CHECK(st.reference == ErrorReference::Exact);
  CHECK(st.ranges.nu_lo == 0.001);
  CHECK(st.ranges.nu_m_hi == 0.11);
  CHECK(st.J == 2);
  CHECK(st.members.size() == 2);
  CHECK(st.members[1].nu_m == 0.2);
  CHECK(make_config(st, 0.1, 1.0).members[0].nu == 0.01);

  using nlohmann::json;
  CHECK_THROWS_AS(apply_study_config(json{{"epsilon", 0.1}}, {}), ConfigError);
  CHECK_THROWS_AS(apply_study_config(json{{"J", 3}, {"members", {{0.01, 0.1}}}}, {}), ConfigError);
  CHECK_THROWS_AS(apply_study_config(json{{"viscosity", {{"nu", {0.01}}}}}, {}), ConfigError);
  CHECK_THROWS_AS(apply_study_config(json{{"J", "twenty"}}, {}), ConfigError);
  CHECK_THROWS_AS(apply_study_config(json{{"reference", "nodal"}}, {}), ConfigError);
  CHECK_THROWS_AS(load_config_file((dir / "missing.json").string()), ConfigError);
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  CHECK_THROWS_AS(load_config_file(path), ConfigError);

  const CavitySettings cav = apply_cavity_config(json{{"re_mean", 500.0}, {"mesh", {{"h", 0.125}}}}, {});
  CHECK(cav.re_mean == 500.0);
  CHECK(cav.h == 0.125);
  const ChannelSettings ch = apply_channel_config(json{{"eps_list", {0.0}}, {"shared_mean_parameters", true}}, {});
  CHECK(ch.eps_list == std::vector<double>{0.0});
  CHECK(ch.shared_mean_parameters);
  std::filesystem::remove_all(dir);
}

TEST_CASE("field and energy output") {
  const auto mesh = unit_square_sv_mesh(1);
  const FeSpace space = FeSpace::vector_p2(mesh);
  const auto u = interpolate(space, VectorFunction([](double x, double y) { return Vec2{3.0 * x, 4.0 * y}; }));
  const std::vector<double> B(u.size(), 0.0);
  std::ostringstream os;
  write_field_vtk(os, space, u, B, "test field");
  const std::string s = os.str();
  CHECK(s.find("test field") != std::string::npos);
  CHECK(s.find("POINTS " + std::to_string(space.node_count())) != std::string::npos);
  CHECK(s.find("CELLS " + std::to_string(4 * space.cell_count())) != std::string::npos);
  for (const char* name : {"velocity", "magnetic_field", "speed", "magnetic_magnitude"}) {
    CHECK(s.find(name) != std::string::npos);
  }

  RunReport rep;
  rep.dt = 0.5;
  rep.steps = 2;
  rep.energy = {1.0, 0.75, 0.5};
  std::ostringstream es;
  write_energy_csv(es, rep);
  const auto lines = lines_of(es.str());
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "n,t,energy");
  CHECK(lines[2].rfind("1,0.5,", 0) == 0);
}

TEST_CASE("primitive ensemble averages") {
  EnsembleState st;
  st.v = {{3.0, 1.0}, {5.0, 1.0}};
  st.w = {{1.0, 1.0}, {1.0, -1.0}};
  st.refresh();
  const auto p = primitive_average(st, 0.25);
  CHECK(p.u == std::vector<double>{2.5, 0.5});
  CHECK(p.B == std::vector<double>{3.0, 1.0});
  const auto z = primitive_average(st, 0.0);
  CHECK(z.u == std::vector<double>{2.5, 0.5});
  CHECK(z.B == std::vector<double>{0.0, 0.0});
}

TEST_CASE("cavity and channel data in Elsasser form") {
  const double s = 0.04, rs = 0.2;
  const ProblemDefinition cav = cavity_problem(s, 0.0);
  const Vec2 lid = cav.v_boundary(0, 0.5, 1.0, 0.0);
  CHECK(lid.x == doctest::Approx(0.5625).epsilon(1e-15));
  CHECK(lid.y == doctest::Approx(rs).epsilon(1e-15));
  CHECK(cav.w_boundary(0, 0.5, 1.0, 0.0).y == doctest::Approx(-rs).epsilon(1e-15));
  CHECK(cav.v_boundary(0, -1.0, 0.3, 0.0).x == 0.0);
  CHECK(cav.v0(0, 0.1, 0.2, 0.0) == Vec2{});

  const ProblemDefinition ch = channel_problem(s, 0.0);
  const Vec2 in = ch.v_boundary(0, 0.0, 5.0, 0.0);
  CHECK(in.x == 1.0);
  CHECK(in.y == doctest::Approx(rs).epsilon(1e-15));
  for (double y = 0.0; y <= 10.0; y += 0.25) CHECK(ch.v_boundary(0, 0.0, y, 0.0).x <= 1.0);
  CHECK(ch.v_boundary(0, 0.0, 0.0, 0.0).x == 0.0);
  CHECK(ch.v_boundary(0, 20.0, 10.0, 0.0).x == 0.0);
  CHECK(ch.v_boundary(0, kChannelLength, 5.0, 0.0).x == 1.0);
  CHECK(ch.v0(0, 13.0, 5.0, 0.0).x == 1.0);
  CHECK(ch.v0(0, 13.0, 5.0, 0.0).y == 0.0);

  const ProblemDefinition chp = channel_problem(s, 0.1);
  CHECK(chp.v_boundary(1, 0.0, 5.0, 0.0).x == doctest::Approx(0.98).epsilon(1e-15));
}

TEST_CASE("small manufactured studies converge") {
  SUBCASE("spatial") {
    const ConvergenceStudy cs = run_spatial_convergence(small_study(4), {2, 4, 8});
    REQUIRE(cs.table.rows.size() == 3);
    for (std::size_t i = 1; i < 3; ++i) {
      CHECK(cs.table.rows[i].err_v < cs.table.rows[i - 1].err_v);
      CHECK(cs.table.rows[i].err_w < cs.table.rows[i - 1].err_w);
    }
    CHECK(*cs.table.rows[2].rate_v > 1.5);
    CHECK(cs.alternate.rows.size() == 3);
    CHECK(cs.max_divergence <= 1e-10);
  }
  SUBCASE("temporal") {
    const ConvergenceStudy cs = run_temporal_convergence(small_study(4), 8, {2, 4, 8});
    REQUIRE(cs.table.rows.size() == 3);
    CHECK(cs.table.rows[0].step == 0.5);
    for (std::size_t i = 1; i < 3; ++i) {
      CHECK(cs.table.rows[i].err_v < cs.table.rows[i - 1].err_v);
      CHECK(cs.table.rows[i].err_w < cs.table.rows[i - 1].err_w);
    }
  }
  SUBCASE("bitwise reproducible under the deterministic grid") {
    const ConvergenceStudy a = run_spatial_convergence(small_study(3), {2, 3});
    const ConvergenceStudy b = run_spatial_convergence(small_study(3), {2, 3});
    std::ostringstream sa, sb;
    write_rate_csv(sa, a.table);
    write_rate_csv(sb, b.table);
    CHECK(sa.str() == sb.str());
    CHECK(a.table.rows[1].err_v == b.table.rows[1].err_v);
  }
}

TEST_CASE("small energy test") {
  StudySettings st = small_study(4);
  st.eps = 0.01;
  const EnergyTest et = run_energy_test(st, 4, 0.1, 0.5);
  REQUIRE_FALSE(et.failure);
  CHECK(et.report.energy.size() == 6);
  CHECK(et.report.energy[0] > 0.0);
  CHECK(et.dissipative);
  CHECK(et.max_relative_increase <= 1e-12);
  CHECK(et.stability.holds);

  // Doubling the initial data quadruples the initial energy.
  const EnsembleConfig cfg = make_config(st, 0.1, 0.5);
  const MmsProblem pb(st.eps, cfg.members);
  ProblemDefinition twice = pb.unforced_homogeneous_definition();
  const MemberField v0 = twice.v0, w0 = twice.w0;
  twice.v0 = [v0](int j, double x, double y, double t) { return 2.0 * v0(j, x, y, t); };
  twice.w0 = [w0](int j, double x, double y, double t) { return 2.0 * w0(j, x, y, t); };
  const EnsembleStepper s2(unit_square_sv_mesh(4), cfg, twice);
  CHECK(s2.energy(s2.initial_state()) == doctest::Approx(4.0 * et.report.energy[0]).epsilon(1e-14));
}

TEST_CASE("uncoupled cavity keeps the Elsasser pair equal") {
  CavitySettings cs;
  cs.J = 3;
  cs.s = 0.0;
  cs.h = 0.5;
  cs.T = 3.0;
  cs.deterministic_grid = true;
  const FieldRun fr = run_cavity(cs);
  REQUIRE_FALSE(fr.result.failure);
  const EnsembleState& st = fr.result.final_state;
  CHECK(st.step == 3);
  for (int j = 0; j < 3; ++j) CHECK(st.v[j] == st.w[j]);
  const auto avg = primitive_average(st, 0.0);
  CHECK(l2(avg.u) > 0.0);
  for (double b : avg.B) CHECK(b == 0.0);
  for (double d : fr.result.report.max_divergence) CHECK(d <= 1e-10);

  const auto members = cavity_members(cs);
  for (const auto& m : members) {
    CHECK(2.0 / m.nu >= 1000.0 / 1.1 - 1e-9);
    CHECK(2.0 / m.nu <= 1000.0 / 0.9 + 1e-9);
    CHECK(m.nu_m >= 0.009);
    CHECK(m.nu_m <= 0.011);
  }
}

TEST_CASE("channel ensemble with shared parameters reproduces the single run") {
  ChannelSettings cs;
  cs.J = 3;
  cs.h = 0.8;
  cs.T = 0.1;
  cs.eps_list = {0.0};
  cs.shared_mean_parameters = true;
  cs.deterministic_grid = true;
  const ChannelStudy study = run_step_channel(cs);
  REQUIRE(study.velocity_distance.size() == 1);
  REQUIRE_FALSE(study.usual.result.failure);
  REQUIRE_FALSE(study.ensembles[0].result.failure);
  const auto usual = primitive_average(study.usual.result.final_state, cs.s);
  const double scale = norm_l2(study.usual.stepper->velocity_space(), usual.u);
  CHECK(scale > 1.0);
  CHECK(study.velocity_distance[0] <= 1e-12 * scale);
  CHECK(study.magnetic_distance[0] <= 1e-12 * scale);
}
