#include "torusmech/observables.hpp"
#include "torusmech/spec_io.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace torusmech;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x[i++] = e;
  return x;
}

// Random observable with at most max_terms terms and small rational
// coefficients; the generator drives the exact bracket-axiom checks.
Observable random_observable(std::mt19937_64& rng, int n, int max_terms = 3) {
  std::uniform_int_distribution<int> nterms(1, max_terms);
  std::uniform_int_distribution<int> num(-6, 6);
  std::uniform_int_distribution<int> den(1, 5);
  std::uniform_int_distribution<int> pow(0, 2);
  std::uniform_int_distribution<int> wav(-2, 2);
  std::uniform_int_distribution<int> kind(0, 1);
  std::vector<ObsTerm> terms;
  int m = nterms(rng);
  for (int t = 0; t < m; ++t) {
    ObsTerm term;
    term.coeff = Rational(num(rng), den(rng));
    for (int i = 0; i < n; ++i) {
      term.ypow.push_back(pow(rng));
      term.wave.push_back(wav(rng));
    }
    term.kind = kind(rng) == 0 ? TrigKind::Cos : TrigKind::Sin;
    terms.push_back(std::move(term));
  }
  return Observable(n, std::move(terms));
}

SystemSpec example3(int n) {
  return example3_system(n, std::vector<int>(n, 1));
}

}  // namespace

TEST_CASE("canonical form is idempotent and order independent") {
  std::mt19937_64 rng(23);
  for (int it = 0; it < 100; ++it) {
    Observable f = random_observable(rng, 2, 4);
    Observable again(f.dimension(), f.terms());
    CHECK(f == again);
    std::vector<ObsTerm> rev(f.terms().rbegin(), f.terms().rend());
    CHECK(f == Observable(f.dimension(), rev));
  }
}

TEST_CASE("hand-checked bracket: {y1, cos x1} = -sin x1") {
  Observable f = Observable::momentum(1, 0);
  Observable g = Observable::wave(1, {1}, TrigKind::Cos);
  Observable b = poisson_bracket(f, g);
  REQUIRE(b.terms().size() == 1);
  CHECK(b.terms()[0].kind == TrigKind::Sin);
  CHECK(b.terms()[0].coeff == Rational(-1));
  CHECK(b.terms()[0].wave == std::vector<int>{1});
  CHECK(b.to_string() == "-sin(x1)");
}

TEST_CASE("{H, H} vanishes identically") {
  SystemSpec spec = example3(2);
  Observable h = hamiltonian_observable(spec.model, spec.potential);
  CHECK(poisson_bracket(h, h).is_zero());
}

TEST_CASE("pendulum factors commute: the system is integrable") {
  SystemSpec spec = example3(2);
  auto f = separable_integrals(spec.model, spec.potential);
  REQUIRE(f.size() == 2);
  CHECK(poisson_bracket(f[0], f[1]).is_zero());
}

TEST_CASE("bracket axioms hold exactly on random observables") {
  std::mt19937_64 rng(101);
  for (int n : {1, 2, 3}) {
    for (int it = 0; it < 40; ++it) {
      Observable f = random_observable(rng, n);
      Observable g = random_observable(rng, n);
      Observable h = random_observable(rng, n);

      // antisymmetry
      CHECK((poisson_bracket(f, g) + poisson_bracket(g, f)).is_zero());
      // Leibniz in the second slot
      Observable leib = poisson_bracket(f, g * h) -
                        (g * poisson_bracket(f, h) + poisson_bracket(f, g) * h);
      CHECK(leib.is_zero());
      // Jacobi identity
      Observable jac = poisson_bracket(f, poisson_bracket(g, h)) +
                       poisson_bracket(g, poisson_bracket(h, f)) +
                       poisson_bracket(h, poisson_bracket(f, g));
      CHECK(jac.is_zero());
    }
  }
}

TEST_CASE("separable integrals sum to the hamiltonian, exactly") {
  SUBCASE("unit example") {
    SystemSpec spec = example3(2);
    auto f = separable_integrals(spec.model, spec.potential);
    Observable sum = f[0] + f[1];
    CHECK(sum == hamiltonian_observable(spec.model, spec.potential));
  }
  SUBCASE("non-unit masses, non-dyadic inverse") {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 2);
    g(0, 0) = 3.0;  // 1/3 is not dyadic; exactness must survive
    g(1, 1) = 0.7;
    TorusModel model(2, g);
    TrigPotential u(2, {{2.0, {2, 0}, TrigKind::Cos},
                        {-0.5, {0, 3}, TrigKind::Sin},
                        {0.25, {0, 0}, TrigKind::Cos}});
    auto f = separable_integrals(model, u);
    Observable sum = f[0] + f[1];
    CHECK(sum == hamiltonian_observable(model, u));
  }
  SUBCASE("one-dimensional scaled mass") {
    Eigen::MatrixXd g(1, 1);
    g << 2.0;
    TorusModel model(1, g);
    TrigPotential u(1, {{1.0, {3}, TrigKind::Cos}});
    auto f = separable_integrals(model, u);
    REQUIRE(f.size() == 1);
    REQUIRE(f[0].terms().size() == 2);
    // canonical order puts the y-degree-0 wave first, the kinetic term second
    CHECK(f[0].terms()[0].wave == std::vector<int>{3});
    CHECK(f[0].terms()[1].coeff == Rational(1, 4));  // y^2/4
  }
}

TEST_CASE("separation fails on coupled terms or non-diagonal metrics") {
  TorusModel flat = TorusModel::euclidean(2);
  TrigPotential coupled(2, {{1.0, {1, 1}, TrigKind::Cos}});
  CHECK_THROWS_AS(separable_integrals(flat, coupled), NonSeparableError);

  Eigen::MatrixXd g(2, 2);
  g << 2, 0.5, 0.5, 2;
  TorusModel skew(2, g);
  TrigPotential u(2, {{1.0, {1, 0}, TrigKind::Cos}});
  CHECK_THROWS_AS(separable_integrals(skew, u), NonDiagonalMetricError);
}

TEST_CASE("momentum map evaluation at the equilibria of the example system") {
  SystemSpec spec = example3(2);
  auto f = separable_integrals(spec.model, spec.potential);

  MomentumValue bottom =
      momentum_map_eval(f, PhasePoint(vec({M_PI, M_PI}), vec({0.0, 0.0})));
  CHECK(bottom.c[0] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(bottom.c[1] == doctest::Approx(-1.0).epsilon(1e-15));

  MomentumValue top =
      momentum_map_eval(f, PhasePoint(vec({0.0, 0.0}), vec({0.0, 0.0})));
  CHECK(top.c[0] == 1.0);
  CHECK(top.c[1] == 1.0);

  MomentumValue mid = momentum_map_eval(
      f, PhasePoint(vec({M_PI / 2, M_PI / 2}), vec({2.0, 0.0})));
  CHECK(mid.c[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(mid.c[1] == doctest::Approx(0.0).epsilon(1e-15));

  // exact arithmetic at quarter-pi lattice points
  CHECK(f[0].eval_exact({1, 1}, {Rational(2), Rational(0)}) == Rational(2));
  CHECK(f[1].eval_exact({1, 1}, {Rational(2), Rational(0)}) == Rational(0));
}

TEST_CASE("rank of the momentum map differential") {
  SystemSpec spec = example3(2);
  auto f = separable_integrals(spec.model, spec.potential);

  // generic point: both rows active
  CHECK(rank_dF(f, PhasePoint(vec({1.0, 2.0}), vec({0.3, -0.2}))) == 2);
  // both factors at equilibria: all gradients vanish
  CHECK(rank_dF(f, PhasePoint(vec({0.0, M_PI}), vec({0.0, 0.0}))) == 0);
  // first factor frozen, second active
  CHECK(rank_dF(f, PhasePoint(vec({0.0, M_PI / 2}), vec({0.0, 1.0}))) == 1);

  // the exact rational rank agrees at quarter-pi points
  CHECK(rank_dF_exact(f, {0, 2}, {Rational(0), Rational(0)}) == 0);
  CHECK(rank_dF_exact(f, {0, 1}, {Rational(0), Rational(1)}) == 1);
  CHECK(rank_dF_exact(f, {1, 1}, {Rational(1), Rational(1)}) == 2);
}

TEST_CASE("involution report certifies and refutes") {
  SUBCASE("example systems pass for n up to 4") {
    for (int n = 2; n <= 4; ++n) {
      SystemSpec spec = example3(n);
      auto f = separable_integrals(spec.model, spec.potential);
      Observable h = hamiltonian_observable(spec.model, spec.potential);
      InvolutionReport rep = involution_report(f, &h);
      CHECK(rep.pass);
      CHECK(rep.pairs_checked == n * (n - 1) / 2 + n);
    }
  }
  SUBCASE("non-commuting pair is flagged with its bracket") {
    std::vector<Observable> f = {Observable::momentum(1, 0),
                                 Observable::wave(1, {1}, TrigKind::Cos)};
    InvolutionReport rep = involution_report(f);
    CHECK(!rep.pass);
    REQUIRE(rep.failures.size() == 1);
    CHECK(rep.failures[0].bracket == "-sin(x1)");
  }
  SUBCASE("single integral passes vacuously") {
    std::vector<Observable> f = {Observable::momentum(1, 0)};
    CHECK(involution_report(f).pass);
    CHECK(involution_report(f).pairs_checked == 0);
  }
}

TEST_CASE("numeric and dyadic evaluation agree with symbolic structure") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ang(0.0, kTwoPi);
  std::uniform_real_distribution<double> mom(-2.0, 2.0);
  for (int it = 0; it < 50; ++it) {
    Observable f = random_observable(rng, 2);
    Observable g = random_observable(rng, 2);
    PhasePoint p(vec({ang(rng), ang(rng)}), vec({mom(rng), mom(rng)}));
    // products evaluate to products (trig rewriting is an identity)
    double lhs = (f * g).eval(p);
    double rhs = f.eval(p) * g.eval(p);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    CHECK(f.eval_dyadic(p) == doctest::Approx(f.eval(p)).epsilon(1e-13));
  }
}

TEST_CASE("derivatives are exact on a worked example") {
  // f = y1^2 cos(2 x1 - x2)
  ObsTerm t{Rational(1), {2, 0}, {2, -1}, TrigKind::Cos};
  Observable f(2, {t});
  Observable fx = f.dx(0);
  REQUIRE(fx.terms().size() == 1);
  CHECK(fx.terms()[0].coeff == Rational(-2));
  CHECK(fx.terms()[0].kind == TrigKind::Sin);
  Observable fy = f.dy(0);
  REQUIRE(fy.terms().size() == 1);
  CHECK(fy.terms()[0].coeff == Rational(2));
  CHECK(fy.terms()[0].ypow == std::vector<int>{1, 0});
  CHECK(f.dy(1).is_zero());
}

TEST_CASE("observable JSON round trip preserves exact coefficients") {
  ObsTerm t1{Rational(1, 3), {1, 0}, {1, 0}, TrigKind::Cos};
  ObsTerm t2{Rational(0.5), {0, 2}, {0, 1}, TrigKind::Sin};
  Observable f(2, {t1, t2});
  Observable back = Observable::from_json(f.to_json());
  CHECK(f == back);
  // and the schema extends the potential term schema with "ypow"
  auto j = f.to_json();
  for (const auto& jt : j.at("terms")) {
    CHECK(jt.contains("amplitude"));
    CHECK(jt.contains("wave"));
    CHECK(jt.contains("kind"));
    CHECK(jt.contains("ypow"));
  }
}
