#include "torusmech/geodesics.hpp"
#include "torusmech/spec_io.hpp"

#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <random>

using namespace torusmech;

namespace {

GeodesicOptions quick_options(int n_points = 128, int restarts = 4) {
  GeodesicOptions opt;
  opt.discretization = n_points;
  opt.restarts = restarts;
  opt.max_iterations = 8000;
  return opt;
}

}  // namespace

TEST_CASE("flat minimal lengths are exact") {
  TorusModel flat = TorusModel::euclidean(2);
  CHECK(flat_minimal_length(flat, HomotopyClass({1, 0})) ==
        doctest::Approx(kTwoPi).epsilon(1e-15));
  CHECK(flat_minimal_length(flat, HomotopyClass({1, 1})) ==
        doctest::Approx(kTwoPi * std::sqrt(2.0)).epsilon(1e-15));

  Eigen::MatrixXd g(2, 2);
  g << 1, 0, 0, 4;
  TorusModel stretched(2, g);
  CHECK(flat_minimal_length(stretched, HomotopyClass({0, 1})) ==
        doctest::Approx(2 * kTwoPi).epsilon(1e-15));

  CHECK_THROWS_AS(flat_minimal_length(flat, HomotopyClass({0, 0})),
                  std::invalid_argument);
}

TEST_CASE("homotopy class bookkeeping") {
  HomotopyClass a({2, -3});
  CHECK(a.primitive());
  CHECK(!a.multiplied(2).primitive());
  CHECK(a.multiplied(3).m == std::vector<int>{6, -9});
  CHECK(HomotopyClass({0, 0}).is_zero());
}

TEST_CASE("free torus: straight lines with the sqrt(E) factor") {
  TorusModel flat = TorusModel::euclidean(2);
  TrigPotential zero(2);
  GeodesicSearchResult res = jacobi_minimal_geodesic(
      flat, zero, 1.0, HomotopyClass({1, 0}), quick_options());
  CHECK(res.converged);
  CHECK(res.length == doctest::Approx(kTwoPi).epsilon(1e-12));
  // the loop stays on the straight line
  for (long j = 0; j < res.loop.rows(); ++j)
    CHECK(std::abs(res.loop(j, 1) - res.loop(0, 1)) < 1e-9);
}

TEST_CASE("constant potentials scale lengths by sqrt(E - c)") {
  TorusModel flat = TorusModel::euclidean(2);
  TrigPotential constant(2, {{1.5, {0, 0}, TrigKind::Cos}});
  // E - c = 4, so lengths double relative to the flat metric
  GeodesicSearchResult res = jacobi_minimal_geodesic(
      flat, constant, 5.5, HomotopyClass({1, 0}), quick_options());
  CHECK(res.length == doctest::Approx(2.0 * kTwoPi).epsilon(1e-10));
  CHECK(res.converged);
}

TEST_CASE("analytic loop gradient matches central finite differences") {
  SystemSpec spec = example3_system(2, {1, 1});
  const double energy = 7.0;
  HomotopyClass alpha({1, 0});
  const int count = 64;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> wiggle(-0.3, 0.3);

  for (int trial = 0; trial < 3; ++trial) {
    Eigen::MatrixXd loop(count, 2);
    for (int j = 0; j < count; ++j) {
      loop(j, 0) = kTwoPi * j / count + wiggle(rng);
      loop(j, 1) = wiggle(rng);
    }
    Eigen::MatrixXd grad =
        jacobi_loop_gradient(spec.model, spec.potential, energy, loop, alpha);
    const double h = 1e-5;
    double worst = 0.0;
    for (int j = 0; j < count; j += 7) {
      for (int i = 0; i < 2; ++i) {
        Eigen::MatrixXd plus = loop, minus = loop;
        plus(j, i) += h;
        minus(j, i) -= h;
        double fd = (jacobi_loop_length(spec.model, spec.potential, energy,
                                        plus, alpha) -
                     jacobi_loop_length(spec.model, spec.potential, energy,
                                        minus, alpha)) /
                    (2 * h);
        worst = std::max(worst, std::abs(fd - grad(j, i)) /
                                    std::max(1.0, std::abs(grad(j, i))));
      }
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("two-pendulum system at E = 2.5, class (1,0)") {
  SystemSpec spec = example3_system(2, {1, 1});
  const double e = 2.5;
  HomotopyClass alpha({1, 0});
  GeodesicSearchResult res = jacobi_minimal_geodesic(
      spec.model, spec.potential, e, alpha, quick_options(192, 6));

  // two-sided conformal bounds from the factor range of E - U
  double lower = std::sqrt(e - 2.0) * kTwoPi;
  double upper = std::sqrt(e + 2.0) * kTwoPi;
  CHECK(res.length > lower);
  CHECK(res.length < upper);

  // independent oracle: the symmetric line x2 = 0 is admissible, so the
  // minimum cannot exceed its quadrature length
  auto line_weight = [&](double t) { return std::sqrt(e - std::cos(t) - 1.0); };
  double line_length =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
          line_weight, 0.0, kTwoPi, 10, 1e-12);
  CHECK(res.length <= line_length + 1e-3 * line_length);
  // and the optimizer does land on that symmetric line
  CHECK(res.length == doctest::Approx(line_length).epsilon(1e-3));
  // regression pin from a converged fine-grid run (N = 4096)
  CHECK(res.length == doctest::Approx(7.4534247208709).epsilon(1e-3));
}

TEST_CASE("multiple traversal obeys L_k <= k L_1") {
  SystemSpec spec = example3_system(2, {1, 1});
  HomotopyClass alpha({1, 0});
  GeodesicOptions opt = quick_options(96, 3);
  GeodesicSearchResult l1 = jacobi_minimal_geodesic(
      spec.model, spec.potential, 2.5, alpha, opt);
  GeodesicOptions opt2 = opt;
  opt2.discretization = 2 * opt.discretization;
  GeodesicSearchResult l2 = jacobi_minimal_geodesic(
      spec.model, spec.potential, 2.5, alpha.multiplied(2), opt2);
  CHECK(l2.length <= 2 * l1.length + 1e-6);
}

TEST_CASE("d_k scan: flat constancy and subadditivity") {
  TorusModel flat = TorusModel::euclidean(2);
  TrigPotential zero(2);
  HomotopyClass alpha({1, 0});
  GeodesicOptions opt = quick_options(64, 2);

  auto rows = d_k_scan(flat, zero, 4.0, alpha, 4, opt);
  REQUIRE(rows.size() == 4);
  double d1 = rows[0].dk;
  CHECK(d1 == doctest::Approx(2.0 * kTwoPi).epsilon(1e-10));
  for (const DkRow& row : rows) {
    CHECK(row.dk == doctest::Approx(d1).epsilon(1e-12));
    CHECK(row.converged);
  }
  // subadditivity over all computed pairs
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t k = 0; k < rows.size(); ++k)
      if (rows[j].k + rows[k].k <= static_cast<int>(rows.size()))
        CHECK(rows[rows[j].k + rows[k].k - 1].length <=
              rows[j].length + rows[k].length + 1e-6);

  CHECK_THROWS_AS(d_k_scan(flat, zero, 4.0, HomotopyClass({2, 0}), 2, opt),
                  std::invalid_argument);
}

TEST_CASE("d_k scan over the two-pendulum system stays non-increasing") {
  SystemSpec spec = example3_system(2, {1, 1});
  GeodesicOptions opt = quick_options(64, 2);
  auto rows =
      d_k_scan(spec.model, spec.potential, 2.5, HomotopyClass({1, 0}), 3, opt);
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i].dk <= rows[i - 1].dk * (1.0 + 1e-3));
  // regression pin: d_1 is the single-traversal minimal length
  CHECK(rows[0].dk == doctest::Approx(7.4534247208709).epsilon(2e-3));
}

TEST_CASE("flat-limit recovery as the potential amplitude shrinks") {
  TorusModel flat = TorusModel::euclidean(2);
  HomotopyClass alpha({1, 0});
  const double e = 2.5;
  double flat_value = std::sqrt(e) * kTwoPi;
  double previous_gap = 1e300;
  for (double amp : {0.5, 0.1, 0.01}) {
    TrigPotential u(2, {{amp, {1, 0}, TrigKind::Cos},
                        {amp, {0, 1}, TrigKind::Cos}});
    GeodesicSearchResult res = jacobi_minimal_geodesic(
        flat, u, e, alpha, quick_options(96, 3));
    double gap = std::abs(res.length - flat_value);
    CHECK(gap < previous_gap);
    CHECK(gap < amp * kTwoPi);  // linear convergence scale
    previous_gap = gap;
  }
}

TEST_CASE("reparametrization stability: doubling N barely moves the length") {
  SystemSpec spec = example3_system(2, {1, 1});
  HomotopyClass alpha({1, 0});
  GeodesicSearchResult coarse = jacobi_minimal_geodesic(
      spec.model, spec.potential, 2.5, alpha, quick_options(96, 3));
  GeodesicSearchResult fine = jacobi_minimal_geodesic(
      spec.model, spec.potential, 2.5, alpha, quick_options(192, 3));
  CHECK(std::abs(fine.length - coarse.length) < 1e-3 * coarse.length);
}

TEST_CASE("degenerate energies are rejected") {
  SystemSpec spec = example3_system(2, {1, 1});
  CHECK_THROWS_AS(
      jacobi_minimal_geodesic(spec.model, spec.potential, 2.0,
                              HomotopyClass({1, 0}), quick_options()),
      DegenerateEnergy);
  CHECK_THROWS_AS(
      jacobi_minimal_geodesic(spec.model, spec.potential, 1.999,
                              HomotopyClass({1, 0}), quick_options()),
      DegenerateEnergy);
  CHECK_THROWS_AS(
      jacobi_minimal_geodesic(spec.model, spec.potential, 2.5,
                              HomotopyClass({0, 0}), quick_options()),
      std::invalid_argument);
}

TEST_CASE("the lift class of the returned loop is exactly the request") {
  SystemSpec spec = example3_system(2, {1, 1});
  HomotopyClass alpha({2, -1});
  GeodesicSearchResult res = jacobi_minimal_geodesic(
      spec.model, spec.potential, 2.5, alpha, quick_options(96, 2));
  CHECK(res.lift_class == alpha.m);
  // the closing segment is q_0 + 2 pi m by construction; verify the stored
  // loop is consistent with a bounded segment to that endpoint
  Eigen::VectorXd closing =
      res.loop.row(0).transpose() +
      kTwoPi * Eigen::Vector2d(alpha.m[0], alpha.m[1]) -
      res.loop.row(res.loop.rows() - 1).transpose();
  CHECK(closing.norm() < 1.0);
}

TEST_CASE("determinism: same seed, same result bits") {
  SystemSpec spec = example3_system(2, {1, 1});
  HomotopyClass alpha({1, 0});
  GeodesicOptions opt = quick_options(96, 4);
  GeodesicSearchResult a = jacobi_minimal_geodesic(
      spec.model, spec.potential, 2.5, alpha, opt);
  GeodesicSearchResult b = jacobi_minimal_geodesic(
      spec.model, spec.potential, 2.5, alpha, opt);
  CHECK(a.length == b.length);
  CHECK(a.best_restart == b.best_restart);
  CHECK(a.loop == b.loop);

  GeodesicOptions threaded = opt;
  threaded.threads = 4;
  GeodesicSearchResult c = jacobi_minimal_geodesic(
      spec.model, spec.potential, 2.5, alpha, threaded);
  CHECK(c.length == a.length);
}
