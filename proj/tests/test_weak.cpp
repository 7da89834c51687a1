#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "wkb/diagnostics.hpp"
#include "wkb/eikonal.hpp"
#include "wkb/wkb_weak.hpp"

using namespace wkb;

namespace {

std::vector<double> uniform_times(double t_end, int steps) {
  std::vector<double> ts;
  for (int k = 0; k <= steps; ++k) ts.push_back(t_end * k / steps);
  return ts;
}

Profile unit_gaussian(int dim = 1) { return Profile::gaussian(Point::Zero(dim), 1.0, 1.0); }

double gauss(double y) { return std::exp(-y * y / 2); }

/// Focusing data with T = 1 in 1-d: x = y (1 - t), J = 1 - t.
struct Focusing {
  Grid grid{1, 256, 8.0};
  std::vector<double> times = uniform_times(0.5, 20);
  Profile a0 = unit_gaussian();
  TracedEikonal traced = trace_eikonal(PotentialSpec::zero(), PhaseSpec::quadratic_focusing(1.0), grid, times);
};

}  // namespace

TEST_CASE("time_index finds stored times only") {
  const std::vector<double> ts{0.0, 0.1, 0.2};
  CHECK(time_index(ts, 0.1) == 1);
  CHECK(time_index(ts, 0.2 + 1e-14) == 2);
  CHECK_THROWS_AS(time_index(ts, 0.15), ConfigError);
}

TEST_CASE("free flow transports the amplitude unchanged") {
  const Grid g(1, 128, 8.0);
  const auto ts = uniform_times(0.5, 10);
  const TracedEikonal tr = trace_eikonal(PotentialSpec::zero(), PhaseSpec::zero(), g, ts);
  const Profile a0 = unit_gaussian();
  const RealArray a0s = a0.sample(g);
  for (double t : {0.0, 0.25, 0.5}) {
    const WaveField a = transport_amplitude(tr.bundle, a0, t, g);
    CHECK((a.values() - a0s.cast<Complex>()).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("G is linear in time") {
    const RealField G = phase_shift_G(tr.bundle, a0, NonlinearitySpec::cubic(1.0), 0.5, g);
    CHECK((G.values() + 0.5 * a0s.square()).abs().maxCoeff() < 1e-12);
    CHECK(phase_shift_G(tr.bundle, a0, NonlinearitySpec::cubic(1.0), 0.0, g).values().abs().maxCoeff() == 0.0);
    CHECK(phase_shift_G(tr.bundle, a0, NonlinearitySpec::none(), 0.5, g).values().abs().maxCoeff() == 0.0);
  }
}

TEST_CASE("focusing amplitude matches the closed form") {
  const Focusing F;
  for (std::size_t i : {std::size_t(0), std::size_t(10), std::size_t(20)}) {
    const double t = F.times[i];
    const WaveField a = transport_amplitude(F.traced.bundle, F.a0, t, F.grid);
    double err = 0.0;
    for (Eigen::Index k = 0; k < F.grid.size(); ++k) {
      const double x = F.grid.point(k)[0];
      err = std::max(err, std::abs(a.values()[k] - gauss(x / (1 - t)) / std::sqrt(1 - t)));
    }
    CHECK(err < 1e-6);
    CHECK(std::abs(norms(a).l2 - l2_norm(F.grid, RealArray(F.a0.sample(F.grid)))) < 1e-8);
  }
}

TEST_CASE("focusing phase shift matches the logarithmic closed form") {
  const Focusing F;
  const double t = F.times.back();
  const RealField G = phase_shift_G(F.traced.bundle, F.a0, NonlinearitySpec::cubic(1.0), t, F.grid);
  double err = 0.0;
  for (Eigen::Index k = 0; k < F.grid.size(); ++k) {
    const double y = F.grid.point(k)[0] / (1 - t);
    err = std::max(err, std::abs(G.values()[k] + gauss(y) * gauss(y) * std::log(1 / (1 - t))));
  }
  CHECK(err < 1e-5);
}

TEST_CASE("build_weak invariants") {
  const Focusing F;
  const WeakWkbField w = build_weak(F.traced.bundle, F.a0, NonlinearitySpec::cubic(1.0), F.grid);
  REQUIRE(w.times.size() == F.times.size());
  for (std::size_t i = 0; i < w.times.size(); ++i) {
    const RealArray lhs = w.a[i].abs2() * w.jacobian[i];
    CHECK((lhs - w.a0_squared[i]).abs().maxCoeff() < 1e-8);
  }
  CHECK(w.G[0].abs().maxCoeff() == 0.0);
  CHECK((w.a[0] - F.a0.sample(F.grid).cast<Complex>()).abs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(build_weak(F.traced.bundle, F.a0, NonlinearitySpec::cubic(0.5), F.grid), ConfigError);
  CHECK_THROWS_AS(build_weak(F.traced.bundle, F.a0, NonlinearitySpec::cubic(0.3), F.grid), ConfigError);
  CHECK_NOTHROW(build_weak(F.traced.bundle, F.a0, NonlinearitySpec::none(), F.grid));
}

TEST_CASE("assemble_weak examples") {
  const Grid g(1, 256, 8.0);
  const auto ts = uniform_times(0.5, 10);
  const TracedEikonal tr = trace_eikonal(PotentialSpec::zero(), PhaseSpec::zero(), g, ts);
  const Profile a0 = unit_gaussian();
  const RealArray a0s = a0.sample(g);
  SUBCASE("critical exponent gives the explicit phase rotation") {
    const WeakWkbField w = build_weak(tr.bundle, a0, NonlinearitySpec::cubic(1.0), g);
    for (double eps : {0.1, 0.02}) {
      const WaveField u = assemble_weak(w, tr.eikonal, eps, 10);
      ComplexArray exact(g.size());
      for (Eigen::Index k = 0; k < g.size(); ++k) exact[k] = std::polar(a0s[k], -0.5 * a0s[k] * a0s[k]);
      CHECK((u.values() - exact).abs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("subcritical shift is bounded by eps |G|") {
    const WeakWkbField w = build_weak(tr.bundle, a0, NonlinearitySpec::cubic(2.0), g);
    const double eps = 0.05;
    const WaveField with = assemble_weak(w, tr.eikonal, eps, 10, true);
    const WaveField without = assemble_weak(w, tr.eikonal, eps, 10, false);
    const double bound = l2_norm(g, RealArray(eps * (w.G[10] * w.a[10].abs())));
    CHECK(field_error(with, without).l2 <= bound * (1 + 1e-12));
    CHECK(field_error(with, without).l2 > 0.9 * bound);
  }
  SUBCASE("zero amplitude gives the zero field") {
    const WeakWkbField w = build_weak(tr.bundle, Profile::zero(), NonlinearitySpec::cubic(1.0), g);
    CHECK(norms(assemble_weak(w, tr.eikonal, 0.1, 10)).linf == 0.0);
  }
}

TEST_CASE("transport and modulus residuals are small under focusing") {
  const Focusing F;
  const WeakWkbField w = build_weak(F.traced.bundle, F.a0, NonlinearitySpec::cubic(1.0), F.grid);
  const RealArray mask = central_mask(F.grid, 0.5);
  const double scale = l2_norm(F.grid, RealArray(F.a0.sample(F.grid)));
  for (std::size_t i : {std::size_t(1), std::size_t(10), std::size_t(19)}) {
    CHECK(transport_residual(w, F.traced.eikonal, i, mask) < 1e-3 * scale);
    CHECK(modulus_residual(w, F.traced.eikonal, i, mask) < 1e-3);
  }
}

TEST_CASE("Eulerian phase solve agrees with G along rays") {
  const Focusing F;
  const auto f = NonlinearitySpec::cubic(1.0);
  const WeakWkbField w = build_weak(F.traced.bundle, F.a0, f, F.grid);
  const auto mol = limit_phase_mol(w, F.traced.eikonal, f);
  REQUIRE(mol.size() == w.G.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < mol.size(); ++i) worst = std::max(worst, (mol[i] - w.G[i]).abs().maxCoeff());
  CHECK(worst < 1e-4);
}

TEST_CASE("2-d harmonic amplitude matches the closed form") {
  const Grid g(2, 32, 6.0);
  const auto ts = uniform_times(0.5, 10);
  const TracedEikonal tr = trace_eikonal(PotentialSpec::harmonic({1.0}), PhaseSpec::zero(), g, ts);
  const Profile a0 = unit_gaussian(2);
  const double t = ts.back(), c = std::cos(t);
  const WaveField a = transport_amplitude(tr.bundle, a0, t, g);
  double err = 0.0;
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    const Point y = g.point(k) / c;
    err = std::max(err, std::abs(a.values()[k] - std::exp(-y.squaredNorm() / 2) / c));
  }
  CHECK(err < 1e-6);
}
