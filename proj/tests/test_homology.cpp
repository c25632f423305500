#include "torusmech/homology.hpp"
#include "torusmech/spec_io.hpp"

#include <doctest.h>

#include "oracles.hpp"

#include <cmath>

using namespace torusmech;

namespace {

TrigPotential cos_waves(int n, int k) {
  std::vector<TrigTerm> terms;
  for (int i = 0; i < n; ++i) {
    std::vector<int> w(n, 0);
    w[i] = k;
    terms.push_back({1.0, w, TrigKind::Cos});
  }
  return TrigPotential(n, terms);
}

// Independent component count: union-find over included vertices and edges,
// bypassing PeriodicCubicalComplex::component_count.
long beta0_oracle(const PeriodicCubicalComplex& c) {
  const long v_count = c.vertex_count();
  oracles::UnionFind uf(static_cast<std::size_t>(v_count));
  std::vector<bool> active(static_cast<std::size_t>(v_count), false);
  for (long v = 0; v < v_count; ++v)
    if (c.cell_included(0, 0, v)) active[static_cast<std::size_t>(v)] = true;
  for (std::size_t slot = 0; slot < c.masks(1).size(); ++slot) {
    int axis = 0;
    while (!(c.masks(1)[slot] & (1 << axis))) ++axis;
    for (long v = 0; v < v_count; ++v)
      if (c.cell_included(1, static_cast<int>(slot), v))
        uf.join(static_cast<std::size_t>(v),
                static_cast<std::size_t>(c.vertex_neighbor(v, axis)));
  }
  return uf.component_count(active);
}

long chi_from_counts(const PeriodicCubicalComplex& c) {
  long chi = 0;
  auto counts = c.cell_counts();
  for (std::size_t d = 0; d < counts.size(); ++d)
    chi += (d % 2 == 0 ? 1 : -1) * counts[d];
  return chi;
}

void check_euler_identity(const PeriodicCubicalComplex& c) {
  for (int p : {2, 3}) {
    BettiVector b = betti(c, p);
    long chi_b = 0;
    for (std::size_t d = 0; d < b.beta.size(); ++d)
      chi_b += (d % 2 == 0 ? 1 : -1) * b.beta[d];
    CHECK(chi_b == chi_from_counts(c));
  }
}

}  // namespace

TEST_CASE("full torus complexes have torus homology") {
  SUBCASE("T^2 at r=16") {
    auto c = PeriodicCubicalComplex::full_torus(2, {16, 16});
    CHECK(c.cells(0) == 256);
    CHECK(c.cells(1) == 512);
    CHECK(c.cells(2) == 256);
    CHECK(betti(c, 2).beta == std::vector<long>{1, 2, 1});
    CHECK(betti(c, 3).beta == std::vector<long>{1, 2, 1});
    check_euler_identity(c);
  }
  SUBCASE("T^3 at r=8") {
    auto c = PeriodicCubicalComplex::full_torus(3, {8, 8, 8});
    CHECK(betti(c, 2).beta == std::vector<long>{1, 3, 3, 1});
    CHECK(betti(c, 5).beta == std::vector<long>{1, 3, 3, 1});
    check_euler_identity(c);
  }
  SUBCASE("T^1") {
    auto c = PeriodicCubicalComplex::full_torus(1, {32});
    CHECK(betti(c, 2).beta == std::vector<long>{1, 1});
  }
}

TEST_CASE("rasterized sublevel sets at the classic energy windows") {
  TrigPotential u = cos_waves(2, 1);

  SUBCASE("above the maximum: everything included") {
    auto r = rasterize_sublevel(u, EnergyLevel(3.0), 16);
    CHECK(r.complex.cells(0) == 256);
    CHECK(r.complex.cells(1) == 512);
    CHECK(r.complex.cells(2) == 256);
  }
  SUBCASE("below the minimum: empty complex") {
    auto r = rasterize_sublevel(u, EnergyLevel(-3.0), 16);
    CHECK(r.complex.cells(0) == 0);
    CHECK(betti(r.complex, 2).beta == std::vector<long>{0, 0, 0});
  }
  SUBCASE("bottom window: one disk around the minimum") {
    auto r = rasterize_sublevel(u, EnergyLevel(-1.0), 64);
    BettiVector b = betti(r.complex, 2);
    CHECK(b.beta == std::vector<long>{1, 0, 0});
    CHECK(beta0_oracle(r.complex) == 1);
    CHECK(chi_from_counts(r.complex) == 1);  // a disk
    check_euler_identity(r.complex);
  }
  SUBCASE("middle window: torus minus one disk") {
    auto r = rasterize_sublevel(u, EnergyLevel(0.5), 64);
    BettiVector b = betti(r.complex, 2);
    CHECK(b.beta == std::vector<long>{1, 2, 0});
    CHECK(beta0_oracle(r.complex) == 1);
    // chi oracle: beta_1 = beta_0 + beta_2 - chi, and beta_2 = 0 for a
    // proper subcomplex of the torus
    CHECK(b.beta[1] == 1 + 0 - chi_from_counts(r.complex));
    check_euler_identity(r.complex);
  }
  SUBCASE("top window: the full torus again") {
    auto r = rasterize_sublevel(u, EnergyLevel(2.5), 64);
    CHECK(betti(r.complex, 2).beta == std::vector<long>{1, 2, 1});
  }
}

TEST_CASE("wave number scaling drives the first Betti number") {
  SUBCASE("k = 2: four disks removed") {
    TrigPotential u = cos_waves(2, 2);
    auto r = rasterize_sublevel(u, EnergyLevel(0.5), 64);
    BettiVector b = betti(r.complex, 2);
    CHECK(b.beta == std::vector<long>{1, 5, 0});
    CHECK(b.beta[1] == 1 - chi_from_counts(r.complex));
    check_euler_identity(r.complex);
  }
  SUBCASE("k = 3") {
    TrigPotential u = cos_waves(2, 3);
    auto r = rasterize_sublevel(u, EnergyLevel(0.5), 64);
    CHECK(betti(r.complex, 2).beta == std::vector<long>{1, 10, 0});
  }
  SUBCASE("bottom window count is k^2") {
    TrigPotential u = cos_waves(2, 2);
    auto r = rasterize_sublevel(u, EnergyLevel(-1.0), 64);
    BettiVector b = betti(r.complex, 2);
    CHECK(b.beta == std::vector<long>{4, 0, 0});
    CHECK(beta0_oracle(r.complex) == 4);
    CHECK(r.complex.component_count() == 4);
  }
}

TEST_CASE("three-dimensional domains retract to graphs in the axis window") {
  SUBCASE("k = 1: wedge of three circles") {
    TrigPotential u = cos_waves(3, 1);
    auto r = rasterize_sublevel(u, EnergyLevel(0.0), 32);
    BettiVector b = betti(r.complex, 2);
    CHECK(b.beta == std::vector<long>{1, 3, 0, 0});
    CHECK(beta0_oracle(r.complex) == 1);
    CHECK(b.beta[1] == 1 - chi_from_counts(r.complex));
    check_euler_identity(r.complex);
  }
  SUBCASE("k = 2: beta_1 = 2 k^3 + 1 = 17") {
    TrigPotential u = cos_waves(3, 2);
    auto r = rasterize_sublevel(u, EnergyLevel(0.0), 32);
    BettiVector b = betti(r.complex, 2);
    CHECK(b.beta == std::vector<long>{1, 17, 0, 0});
    CHECK(b.beta[1] == 1 - chi_from_counts(r.complex));
    // confirm at a finer resolution
    auto r48 = rasterize_sublevel(u, EnergyLevel(0.0), 48);
    CHECK(betti(r48.complex, 2).beta == std::vector<long>{1, 17, 0, 0});
  }
  SUBCASE("doubling the resolution changes nothing") {
    for (int k : {1, 2}) {
      TrigPotential u = cos_waves(3, k);
      auto lo = rasterize_sublevel(u, EnergyLevel(0.0), 32);
      auto hi = rasterize_sublevel(u, EnergyLevel(0.0), 64);
      CHECK(betti(lo.complex, 2).beta == betti(hi.complex, 2).beta);
    }
  }
}

TEST_CASE("one-dimensional sublevels") {
  TrigPotential u(1, {{1.0, {1}, TrigKind::Cos}});
  auto arc = rasterize_sublevel(u, EnergyLevel(0.0), 64);
  CHECK(betti(arc.complex, 2).beta == std::vector<long>{1, 0});
  auto full = rasterize_sublevel(u, EnergyLevel(2.0), 64);
  CHECK(betti(full.complex, 2).beta == std::vector<long>{1, 1});
}

TEST_CASE("gluing: analytic and combinatorial routes agree") {
  TrigPotential u = cos_waves(2, 1);
  EnergyLevel e(0.5);
  const int r = 64;
  auto base = rasterize_sublevel(u, e, r);

  SUBCASE("uniform 2 x 2 gluing") {
    GluingSpec m({2, 2});
    auto analytic = rasterize_sublevel(glue(u, m), e, {2 * r, 2 * r});
    auto combinatorial = glue_complex(base.complex, m);
    CHECK(combinatorial.cells(2) == 4 * base.complex.cells(2));
    CHECK(betti(analytic.complex, 2).beta == betti(combinatorial, 2).beta);
    CHECK(betti(analytic.complex, 2).beta == std::vector<long>{1, 5, 0});
  }
  SUBCASE("anisotropic 3 x 1 gluing") {
    GluingSpec m({3, 1});
    auto analytic = rasterize_sublevel(glue(u, m), e, {3 * r, r});
    auto combinatorial = glue_complex(base.complex, m);
    CHECK(betti(analytic.complex, 2).beta == betti(combinatorial, 2).beta);
    check_euler_identity(combinatorial);
  }
  SUBCASE("identity gluing is bit-identical") {
    GluingSpec m({1, 1});
    CHECK(glue_complex(base.complex, m) == base.complex);
    TrigPotential same = glue(u, m);
    CHECK(same.terms().size() == u.terms().size());
  }
}

TEST_CASE("energy scan marks the Morse windows") {
  TrigPotential u = cos_waves(2, 1);
  auto rows = betti_scan(u, {-2.5, -1.0, 0.5, 2.5}, {64, 64}, 2);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].betti.beta == std::vector<long>{0, 0, 0});
  CHECK(rows[1].betti.beta == std::vector<long>{1, 0, 0});
  CHECK(rows[2].betti.beta == std::vector<long>{1, 2, 0});
  CHECK(rows[3].betti.beta == std::vector<long>{1, 2, 1});
  CHECK_THROWS_AS(betti_scan(u, {1.0, 0.0}, {64, 64}, 2),
                  std::invalid_argument);
}

TEST_CASE("monotonicity: lower sublevels are subcomplexes") {
  TrigPotential u = cos_waves(2, 2);
  auto a = rasterize_sublevel(u, EnergyLevel(-0.5), 32);
  auto b = rasterize_sublevel(u, EnergyLevel(0.75), 32);
  auto c = rasterize_sublevel(u, EnergyLevel(1.9), 32);
  CHECK(a.complex.subset_of(b.complex));
  CHECK(b.complex.subset_of(c.complex));
  CHECK(!c.complex.subset_of(a.complex));
}

TEST_CASE("resolution doubling is stable away from critical values") {
  TrigPotential u = cos_waves(2, 1);
  for (double e : {-1.0, 0.5}) {
    auto lo = rasterize_sublevel(u, EnergyLevel(e), 32);
    auto hi = rasterize_sublevel(u, EnergyLevel(e), 64);
    CHECK(betti(lo.complex, 2).beta == betti(hi.complex, 2).beta);
  }
}

TEST_CASE("degenerate level warning when E rides a grid value") {
  TrigPotential u = cos_waves(2, 1);
  // U(0, pi/2) evaluates within 1e-12 of 1.0 on the r=64 grid
  auto warn = rasterize_sublevel(u, EnergyLevel(1.0), 64);
  CHECK(warn.degenerate_level);
  auto clean = rasterize_sublevel(u, EnergyLevel(0.5), 64);
  CHECK(!clean.degenerate_level);
}

TEST_CASE("budget and validation guards") {
  TrigPotential u = cos_waves(2, 1);
  CHECK_THROWS_AS(rasterize_sublevel(u, EnergyLevel(0.0), 4),
                  std::invalid_argument);
  CHECK_THROWS_AS(rasterize_sublevel(u, EnergyLevel(0.0), 1 << 14, 1 << 20),
                  BudgetExceeded);
  CHECK_THROWS_AS(GluingSpec({0, 2}), std::invalid_argument);
  auto base = rasterize_sublevel(u, EnergyLevel(0.5), 64);
  CHECK_THROWS_AS(glue_complex(base.complex, GluingSpec({512, 512}), 1 << 20),
                  BudgetExceeded);
  CHECK_THROWS_AS(betti(base.complex, 4), std::invalid_argument);
}

TEST_CASE("closure property holds on constructed complexes") {
  TrigPotential u = cos_waves(2, 3);
  auto r = rasterize_sublevel(u, EnergyLevel(0.3), 32);
  CHECK(r.complex.closure_ok());
  auto t = r.complex.tiled(GluingSpec({2, 2}));
  CHECK(t.closure_ok());
}
