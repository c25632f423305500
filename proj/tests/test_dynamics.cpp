#include "torusmech/dynamics.hpp"
#include "torusmech/spec_io.hpp"

#include <doctest.h>

#include <cmath>

using namespace torusmech;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x[i++] = e;
  return x;
}

// Closed-form pendulum periods via complete elliptic integrals; independent
// of the quadrature path under test.
double pendulum_oscillation_period(int k, double a, double mass, double c) {
  double s0 = std::sqrt((c + a) / (2.0 * a));
  return 4.0 / k * std::sqrt(mass / a) * std::comp_ellint_1(s0);
}

double pendulum_rotation_period(double a, double mass, double c) {
  double m = std::sqrt(2.0 * a / (c + a));
  return 2.0 * std::sqrt(2.0 * mass) * std::comp_ellint_1(m) / std::sqrt(c + a);
}

FactorPortrait pendulum_factor(int k, double a = 1.0, double mass = 1.0) {
  TrigPotential slice(1, {{a, {k}, TrigKind::Cos}});
  return make_factor_portrait(0, mass, slice, 0.0);
}

}  // namespace

TEST_CASE("free motion drifts exactly") {
  TorusModel flat = TorusModel::euclidean(2);
  TrigPotential zero(2);
  PhasePoint p0(vec({0.5, 1.0}), vec({0.25, -0.125}));
  PhaseTrajectory traj = integrate(flat, zero, p0, 0.125, 64);
  for (long s = 0; s < traj.size(); ++s) {
    double t = traj.time(s);
    PhasePoint p = traj.point(s);
    // drift is exact: x(t) = x0 + t y0 mod 2pi with dyadic t and momenta
    CHECK(p.x[0] == reduce_angle(0.5 + t * 0.25));
    CHECK(p.x[1] == reduce_angle(1.0 - t * 0.125));
    CHECK(p.y == p0.y);
  }
  std::vector<Observable> momenta = {Observable::momentum(2, 0),
                                     Observable::momentum(2, 1)};
  CHECK(integral_drift(traj, momenta) == 0.0);
}

TEST_CASE("the stable equilibrium stays put") {
  SystemSpec spec = example3_system(1, {1});
  PhasePoint p0(vec({M_PI}), vec({0.0}));
  PhaseTrajectory traj = integrate(spec.model, spec.potential, p0, 1e-3, 10000);
  PhasePoint end = traj.point(traj.size() - 1);
  CHECK(std::abs(end.x[0] - M_PI) < 1e-12);
  CHECK(std::abs(end.y[0]) < 1e-12);
}

TEST_CASE("energy is conserved without secular drift") {
  SystemSpec spec = example3_system(2, {1, 1});
  auto max_drift = [&](const PhasePoint& p0, long steps) {
    PhaseTrajectory traj =
        integrate(spec.model, spec.potential, p0, 1e-3, steps);
    double h0 = traj.energy(0);
    double drift = 0.0;
    for (long s = 0; s < traj.size(); ++s)
      drift = std::max(drift, std::abs(traj.energy(s) - h0));
    return drift;
  };
  // moderate oscillation orbit: drift well under 1e-7
  PhasePoint moderate(vec({M_PI - 0.5, M_PI + 0.3}), vec({0.1, -0.2}));
  CHECK(max_drift(moderate, 100000) < 1e-7);

  // wide swing near the turning point: larger oscillation amplitude, but
  // still bounded, with no growth as the horizon stretches
  PhasePoint wide(vec({M_PI / 2, M_PI}), vec({0.1, 0.0}));
  double short_run = max_drift(wide, 20000);
  double long_run = max_drift(wide, 200000);
  CHECK(long_run < 1e-6);
  CHECK(long_run < short_run * 1.5);
}

TEST_CASE("second-order convergence of the energy error") {
  SystemSpec spec = example3_system(2, {1, 1});
  PhasePoint p0(vec({M_PI / 2, M_PI}), vec({1.2, 0.4}));
  auto max_drift = [&](double dt, long steps) {
    PhaseTrajectory traj = integrate(spec.model, spec.potential, p0, dt, steps);
    double h0 = traj.energy(0);
    double drift = 0.0;
    for (long s = 0; s < traj.size(); ++s)
      drift = std::max(drift, std::abs(traj.energy(s) - h0));
    return drift;
  };
  double d4 = max_drift(4e-3, 25000);
  double d2 = max_drift(2e-3, 50000);
  double d1 = max_drift(1e-3, 100000);
  CHECK(d4 / d2 == doctest::Approx(4.0).epsilon(0.2));
  CHECK(d2 / d1 == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("time reversibility") {
  SystemSpec spec = example3_system(2, {2, 1});
  PhasePoint p0(vec({0.3, 2.1}), vec({0.7, -0.4}));
  const double dt = 1e-3;
  const long steps = 10000;
  PhaseTrajectory fwd = integrate(spec.model, spec.potential, p0, dt, steps);
  PhasePoint mid = fwd.point(fwd.size() - 1);
  PhaseTrajectory bwd = integrate(spec.model, spec.potential, mid, -dt, steps);
  PhasePoint back = bwd.point(bwd.size() - 1);
  CHECK((back.x - p0.x).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((back.y - p0.y).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("confinement to the domain of possible motions") {
  SystemSpec spec = example3_system(2, {1, 1});
  PhasePoint p0(vec({M_PI / 2, M_PI}), vec({0.6, 0.2}));
  double e = hamiltonian(spec.model, spec.potential, p0);
  PhaseTrajectory traj =
      integrate(spec.model, spec.potential, p0, 1e-3, 50000);
  ConfinementReport rep =
      check_confinement(traj, spec.potential, EnergyLevel(e));
  CHECK(rep.ok);
  CHECK(rep.max_excursion <= 1e-6);

  // an oscillating factor never crosses its turning point: cos(x1) <= c1
  auto integrals = separable_integrals(spec.model, spec.potential);
  double c1 = integrals[0].eval(p0);
  REQUIRE(c1 < 1.0);
  for (long s = 0; s < traj.size(); ++s)
    CHECK(std::cos(traj.point(s).x[0]) <= c1 + 1e-6);
}

TEST_CASE("integral drift stays at integrator-error scale") {
  SystemSpec spec = example3_system(2, {1, 1});
  auto f = separable_integrals(spec.model, spec.potential);
  PhasePoint p0(vec({M_PI - 0.5, M_PI + 0.3}), vec({0.1, -0.2}));
  PhaseTrajectory traj =
      integrate(spec.model, spec.potential, p0, 1e-3, 100000, &f);
  CHECK(integral_drift(traj, f) < 1e-7);
}

TEST_CASE("factor periods against the elliptic closed forms") {
  SUBCASE("harmonic limits") {
    FactorPortrait f1 = pendulum_factor(1);
    CHECK(factor_period(f1, -1.0 + 1e-3) ==
          doctest::Approx(2 * M_PI).epsilon(1e-2 / (2 * M_PI)));
    FactorPortrait f2 = pendulum_factor(2);
    CHECK(factor_period(f2, -1.0 + 1e-3) ==
          doctest::Approx(M_PI).epsilon(1e-2 / M_PI));
    // scaled mass: omega = k sqrt(a / G)
    FactorPortrait fm = pendulum_factor(1, 1.0, 4.0);
    CHECK(factor_period(fm, -1.0 + 1e-3) ==
          doctest::Approx(4 * M_PI).epsilon(1e-2));
  }
  SUBCASE("oscillation branch matches K(m)") {
    for (int k : {1, 2, 3}) {
      FactorPortrait f = pendulum_factor(k);
      for (double c : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
        double expected = pendulum_oscillation_period(k, 1.0, 1.0, c);
        CHECK(factor_period(f, c) == doctest::Approx(expected).epsilon(1e-9));
      }
    }
  }
  SUBCASE("rotation branch matches K(m)") {
    FactorPortrait f = pendulum_factor(1);
    for (double c : {1.5, 2.0, 5.0, 10.0}) {
      double expected = pendulum_rotation_period(1.0, 1.0, c);
      CHECK(factor_period(f, c) == doctest::Approx(expected).epsilon(1e-9));
    }
    // large-momentum asymptotics: T ~ 2 pi / sqrt(2 c)
    CHECK(factor_period(f, 200.0) ==
          doctest::Approx(2 * M_PI / std::sqrt(400.0)).epsilon(1e-2));
  }
  SUBCASE("multi-term factor period is finite and positive") {
    TrigPotential v(1, {{1.0, {1}, TrigKind::Cos}, {0.5, {2}, TrigKind::Cos}});
    FactorPortrait f = make_factor_portrait(0, 1.0, v, 0.0);
    double t = factor_period(f, 0.0);  // merged well spanning the inner saddle
    CHECK(t > 0.0);
    CHECK(std::isfinite(t));
  }
  SUBCASE("rejections") {
    FactorPortrait f = pendulum_factor(1);
    CHECK_THROWS_AS(factor_period(f, 1.0), SeparatrixEnergy);
    CHECK_THROWS_AS(factor_period(f, -1.0), SeparatrixEnergy);
    CHECK_THROWS_AS(factor_period(f, -1.5), BelowMinimum);
  }
}

TEST_CASE("rotation period decreases in c and diverges at the separatrix") {
  FactorPortrait f = pendulum_factor(1);
  double prev = factor_period(f, 1.0 + 1e-6);
  for (int j = 1; j <= 20; ++j) {
    double c = 1.0 + 1e-6 + 0.5 * j;
    double t = factor_period(f, c);
    CHECK(t < prev);
    prev = t;
  }
  CHECK(factor_period(f, 1.0 + 1e-10) > 3.0 * factor_period(f, 1.0 + 1e-2));
}

TEST_CASE("simulated winding period agrees with the quadrature") {
  SystemSpec spec = example3_system(1, {1});
  FactorPortrait f = pendulum_factor(1);
  for (double c : {6.0, 12.0}) {
    double y0 = std::sqrt(2.0 * (c - 1.0));  // start at x = 0 where V = 1
    PhasePoint p0(vec({0.0}), vec({y0}));
    double quadrature = factor_period(f, c);
    double simulated = measure_winding_period(spec.model, spec.potential, p0,
                                              0, 1e-4, 4000000);
    CHECK(simulated == doctest::Approx(quadrature).epsilon(1e-6));
  }
}

TEST_CASE("frequency collinearity probe") {
  TorusModel flat = TorusModel::euclidean(2);
  TrigPotential zero(2);
  auto factors = factor_portraits(flat, zero);

  SUBCASE("identical cells give zero deviation") {
    Eigen::VectorXd c = vec({0.5, 0.5});
    CollinearityReport rep =
        collinearity_check(factors, c, {1, 1}, c, {1, 1});
    CHECK(rep.precondition_met);
    CHECK(rep.collinear);
    CHECK(rep.deviation < 1e-12);
  }
  SUBCASE("proportional free tori are collinear") {
    // y = (1,1) and y = (2,2): same class, different speed
    CollinearityReport rep = collinearity_check(
        factors, vec({0.5, 0.5}), {1, 1}, vec({2.0, 2.0}), {2, 2});
    CHECK(rep.precondition_met);
    CHECK(rep.collinear);
  }
  SUBCASE("distinct primitive classes: precondition unmet") {
    CollinearityReport rep = collinearity_check(
        factors, vec({0.5, 0.5}), {1, 1}, vec({0.5, 2.0}), {1, 2});
    CHECK(!rep.precondition_met);
    CHECK(!rep.note.empty());
  }
  SUBCASE("oscillation cells are rejected as non-rotational") {
    SystemSpec spec = example3_system(2, {1, 1});
    auto pend = factor_portraits(spec.model, spec.potential);
    CollinearityReport rep = collinearity_check(
        pend, vec({0.0, 2.0}), {1, 1}, vec({0.0, 3.0}), {1, 1});
    CHECK(!rep.precondition_met);
  }
}

TEST_CASE("trajectory recording with stride and integrals") {
  SystemSpec spec = example3_system(2, {1, 1});
  auto f = separable_integrals(spec.model, spec.potential);
  PhasePoint p0(vec({1.0, 2.0}), vec({0.3, 0.1}));
  PhaseTrajectory traj =
      integrate(spec.model, spec.potential, p0, 1e-3, 1000, &f, 10);
  CHECK(traj.size() == 101);
  CHECK(traj.integral_count() == 2);
  CHECK(traj.time(1) == doctest::Approx(0.01));
  // recorded integral values match re-evaluation at the recorded points
  for (long s = 0; s < traj.size(); s += 25)
    CHECK(traj.integral(0, s) ==
          doctest::Approx(f[0].eval(traj.point(s))).epsilon(1e-14));
}
