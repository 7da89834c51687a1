#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "wkb/diagnostics.hpp"

using namespace wkb;

namespace {

std::vector<double> uniform_times(double t_end, int steps) {
  std::vector<double> ts;
  for (int k = 0; k <= steps; ++k) ts.push_back(t_end * k / steps);
  return ts;
}

Profile unit_gaussian(int dim = 1) { return Profile::gaussian(Point::Zero(dim), 1.0, 1.0); }

double centre_of_mass(const WaveField& u) {
  const RealArray rho = u.values().abs2();
  RealArray x(u.grid().size());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = u.grid().point(i)[0];
  return integrate(u.grid(), RealArray(x * rho)) / integrate(u.grid(), rho);
}

}  // namespace

TEST_CASE("nonlinearity specs") {
  const auto none = NonlinearitySpec::none();
  CHECK(none.is_none());
  CHECK(none.coupling(0.1) == 0.0);
  const auto cubic = NonlinearitySpec::cubic(0.5);
  CHECK(cubic.f(3.0) == 3.0);
  CHECK(cubic.df(3.0) == 1.0);
  CHECK(cubic.coupling(0.04) == doctest::Approx(0.2));
  CHECK(NonlinearitySpec::cubic(0.0).coupling(0.3) == 1.0);
  CHECK_THROWS_AS(NonlinearitySpec::cubic(-1.0), ConfigError);
  const auto focusing = NonlinearitySpec::smooth_defocusing([](double y) { return -y; }, [](double) { return -1.0; },
                                                             0.0, "focusing");
  CHECK_THROWS_AS(focusing.validate(1.0), AssumptionError);
  const auto critical = NonlinearitySpec::smooth_defocusing([](double y) { return -y; }, [](double) { return -1.0; },
                                                             1.0, "focusing");
  CHECK_NOTHROW(critical.validate(1.0));
  CHECK_NOTHROW(cubic.validate(10.0));
}

TEST_CASE("profiles") {
  Point c(1);
  c << 0.5;
  const Profile g = Profile::gaussian(c, 2.0, 3.0);
  Point x(1);
  x << 2.5;
  CHECK(g(x) == doctest::Approx(3.0 * std::exp(-0.5)));
  const Profile odd = Profile::odd_gaussian(c, 2.0, 3.0);
  CHECK(odd(x) == doctest::Approx(2.0 * 3.0 * std::exp(-0.5)));
  const Profile bump = Profile::bump(c, 1.0, 2.0);
  CHECK(bump(c) == doctest::Approx(2.0));
  CHECK(bump(x) == 0.0);
  CHECK(Profile::zero()(x) == 0.0);
  const Grid grid(1, 32, 2.0);
  const RealArray vals = RealArray::LinSpaced(32, 0.0, 1.0);
  const Profile table = Profile::table(grid, vals);
  CHECK((table.sample(grid) - vals).abs().maxCoeff() == 0.0);
}

TEST_CASE("initial data examples") {
  const Grid g(1, 1024, 12.0);
  const Profile a0 = unit_gaussian();
  SUBCASE("zero phase gives a real Gaussian") {
    for (double eps : {0.3, 0.01}) {
      const WaveField u = initial_data(g, a0, Profile::zero(), PhaseSpec::zero(), eps);
      CHECK(u.values().imag().abs().maxCoeff() == 0.0);
      CHECK((u.values().real() - a0.sample(g)).abs().maxCoeff() == 0.0);
      CHECK(u.epsilon() == eps);
    }
  }
  SUBCASE("chirp leaves the norm unchanged") {
    const Grid fine(1, 2048, 12.0);
    const WaveField u = initial_data(fine, a0, Profile::zero(), PhaseSpec::quadratic_focusing(1.0), 0.1);
    CHECK(std::abs(norms(u).l2 - l2_norm(fine, RealArray(a0.sample(fine)))) < 1e-10);
  }
  SUBCASE("first-order amplitude") {
    const Profile a1 = Profile::odd_gaussian(Point::Zero(1), 1.0, 1.0);
    const auto phase = PhaseSpec::quadratic_focusing(1.0);
    const double eps = 0.05;
    const Grid fine(1, 4096, 12.0);
    const WaveField u = initial_data(fine, a0, a1, phase, eps);
    const WaveField lead = initial_data(fine, a0, Profile::zero(), phase, eps);
    const double d = field_error(u, lead).l2;
    CHECK(std::abs(d - eps * l2_norm(fine, RealArray(a1.sample(fine)))) < 1e-10);
  }
  SUBCASE("under-resolved chirp is rejected with the needed size") {
    const Grid coarse(1, 64, 12.0);
    try {
      initial_data(coarse, a0, Profile::zero(), PhaseSpec::quadratic_focusing(1.0), 0.01);
      FAIL("expected a resolution error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("points") != std::string::npos);
    }
  }
}

TEST_CASE("strang_step examples") {
  const Grid g(1, 64, M_PI);
  SUBCASE("plane wave") {
    const int k = 3;
    const double eps = 0.2, dt = 0.01;
    const auto u = WaveField::sample(g, [&](const Point& x) { return std::polar(1.0, k * x[0]); }, eps);
    const WaveField v = strang_step(u, 0.0, dt, PotentialSpec::zero(), NonlinearitySpec::none());
    const Complex factor = std::polar(1.0, -eps * k * k * dt / 2);
    CHECK((v.values() - factor * u.values()).abs().maxCoeff() < 1e-13);
  }
  SUBCASE("constant state under cubic kappa = 0") {
    const double eps = 0.1, dt = 0.03;
    const Complex c(0.6, -0.3);
    const auto u = WaveField::sample(g, [&](const Point&) { return c; }, eps);
    const WaveField v = strang_step(u, 0.0, dt, PotentialSpec::zero(), NonlinearitySpec::cubic(0.0));
    const Complex exact = c * std::polar(1.0, -dt * std::norm(c) / eps);
    CHECK((v.values() - exact).abs().maxCoeff() < 1e-14);
  }
  SUBCASE("unitary on random data") {
    std::mt19937 rng(1);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
      ComplexArray vals(g.size());
      for (auto& z : vals) z = Complex(n(rng), n(rng));
      const WaveField u(g, vals, 0.05);
      const WaveField v = strang_step(u, 0.3, 0.002, PotentialSpec::harmonic({1.0}), NonlinearitySpec::cubic(0.5));
      CHECK(std::abs(norms(v).l2 - norms(u).l2) < 1e-13 * norms(u).l2);
    }
  }
}

TEST_CASE("linear free solve matches the exact propagator") {
  const Grid g(1, 1024, 12.0);
  const double eps = 0.1;
  const WaveField u0 = initial_data(g, unit_gaussian(), Profile::zero(), PhaseSpec::zero(), eps);
  const NlsRun run = solve(NlsProblem{u0, PotentialSpec::zero(), NonlinearitySpec::none(), {0.0, 0.25, 0.5}});
  CHECK(field_error(run.fields.back(), free_propagate(u0, 0.5)).l2 < 1e-8);
  CHECK(run.max_mass_drift < 1e-11);
  CHECK(run.times == std::vector<double>{0.0, 0.25, 0.5});
}

TEST_CASE("spatially constant time-dependent potential adds the exact phase") {
  const Grid g(1, 256, 8.0);
  const double eps = 0.2, T = 0.4;
  const auto V = PotentialSpec::custom([](double t, const Point&) { return t; },
                                       [](double, const Point& x) { return Point(Point::Zero(x.size())); },
                                       [](double, const Point& x) { return Matrix(Matrix::Zero(x.size(), x.size())); },
                                       true, "ramp");
  const WaveField u0 = initial_data(g, unit_gaussian(), Profile::zero(), PhaseSpec::zero(), eps);
  const NlsRun run = solve(NlsProblem{u0, V, NonlinearitySpec::none(), {T}});
  const WaveField exact = free_propagate(u0, T);
  const ComplexArray shifted = exact.values() * std::polar(1.0, -T * T / (2 * eps));
  CHECK(field_error(run.fields.back(), exact.with_values(shifted)).l2 < 1e-12);
}

TEST_CASE("coherent state follows the classical ray") {
  const double eps = 0.1, w = 1.0, x0 = 2.0;
  const Grid g(1, 1024, 10.0);
  Point c(1);
  c << x0;
  const Profile a0 = Profile::gaussian(c, std::sqrt(eps / w), 1.0);
  const WaveField u0 = initial_data(g, a0, Profile::zero(), PhaseSpec::zero(), eps);
  const auto ts = uniform_times(2.0, 8);
  const NlsRun run = solve(NlsProblem{u0, PotentialSpec::harmonic({w}), NonlinearitySpec::none(), ts});
  for (std::size_t i = 0; i < ts.size(); ++i) {
    CHECK(std::abs(centre_of_mass(run.fields[i]) - x0 * std::cos(w * ts[i])) < 1e-6);
  }
  CHECK(run.max_mass_drift < 1e-11);
}

TEST_CASE("Strang self-convergence is second order") {
  const Grid g(1, 512, 10.0);
  const double eps = 0.1, T = 0.5;
  const auto f = NonlinearitySpec::cubic(0.0);
  const WaveField u0 = initial_data(g, unit_gaussian(), Profile::zero(), PhaseSpec::zero(), eps);
  auto run_with = [&](double dt) {
    NlsProblem p{u0, PotentialSpec::zero(), f, {T}};
    p.dt = dt;
    return solve(p).fields.back();
  };
  const double dt0 = T / 100;
  const WaveField ref = run_with(dt0 / 32);
  std::vector<double> dts, errs;
  for (double dt : {dt0, dt0 / 2, dt0 / 4}) {
    dts.push_back(dt);
    errs.push_back(field_error(run_with(dt), ref).l2);
  }
  const double order = fit_rate(dts, errs).slope;
  CHECK(order >= 1.8);
  CHECK(order <= 2.2);
}

TEST_CASE("time step selection") {
  CHECK(default_time_step(0.5, 0.1, 1.0) == doctest::Approx(2.5e-4));
  CHECK(default_time_step(10.0, 0.01, 1.0) == doctest::Approx(1e-3));
  CHECK(default_time_step(10.0, 0.01, 1e-4) == doctest::Approx(1e-4));
  const Grid g(1, 128, 8.0);
  const WaveField u0 = initial_data(g, unit_gaussian(), Profile::zero(), PhaseSpec::zero(), 0.1);
  const NlsRun run = solve(NlsProblem{u0, PotentialSpec::zero(), NonlinearitySpec::cubic(1.0), {0.0, 0.1, 0.3}});
  CHECK(run.dt <= default_time_step(0.3, 0.1, 1.0));
  CHECK(run.step_times.back() == doctest::Approx(0.3));
  CHECK(run.step_mass.size() == run.step_times.size());
}

TEST_CASE("mass near the box edge is reported") {
  const Grid g(1, 128, 4.0);
  const Profile wide = Profile::gaussian(Point::Zero(1), 2.0, 1.0);
  const WaveField u0 = initial_data(g, wide, Profile::zero(), PhaseSpec::zero(), 0.1);
  CHECK(boundary_mass_fraction(u0) > 1e-8);
  CHECK_THROWS_AS(solve(NlsProblem{u0, PotentialSpec::zero(), NonlinearitySpec::none(), {0.1}}), DomainTooSmallError);
  NlsProblem unchecked{u0, PotentialSpec::zero(), NonlinearitySpec::none(), {0.1}};
  unchecked.check_boundary = false;
  CHECK_NOTHROW(solve(unchecked));
}

TEST_CASE("bad snapshot lists are rejected") {
  const Grid g(1, 128, 8.0);
  const WaveField u0 = initial_data(g, unit_gaussian(), Profile::zero(), PhaseSpec::zero(), 0.1);
  CHECK_THROWS_AS(solve(NlsProblem{u0, PotentialSpec::zero(), NonlinearitySpec::none(), {0.2, 0.1}}), ConfigError);
  CHECK_THROWS_AS(solve(NlsProblem{u0, PotentialSpec::zero(), NonlinearitySpec::none(), {}}), ConfigError);
  CHECK_THROWS_AS(solve(NlsProblem{WaveField::zero(g), PotentialSpec::zero(), NonlinearitySpec::none(), {0.1}}),
                  ConfigError);
}

TEST_CASE("solves are deterministic") {
  const Grid g(1, 256, 8.0);
  const WaveField u0 = initial_data(g, unit_gaussian(), Profile::zero(), PhaseSpec::zero(), 0.05);
  const NlsProblem p{u0, PotentialSpec::harmonic({0.5}), NonlinearitySpec::cubic(1.0), {0.2}};
  CHECK((solve(p).fields.back().values() - solve(p).fields.back().values()).abs().maxCoeff() == 0.0);
}

TEST_CASE("2-d solve smoke test") {
  const Grid g(2, 64, 6.0);
  const double eps = 0.2;
  const WaveField u0 = initial_data(g, unit_gaussian(2), Profile::zero(), PhaseSpec::zero(), eps);
  const NlsRun run = solve(NlsProblem{u0, PotentialSpec::zero(), NonlinearitySpec::none(), {0.3}});
  CHECK(field_error(run.fields.back(), free_propagate(u0, 0.3)).l2 < 1e-10);
  const NlsRun nl = solve(NlsProblem{u0, PotentialSpec::harmonic({1.0, 2.0}), NonlinearitySpec::cubic(0.0), {0.3}});
  CHECK(nl.max_mass_drift < 1e-11);
}
