#pragma once

#include "torusmech/model.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace torusmech {

struct BudgetExceeded : std::runtime_error {
  explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};
struct ClosureViolation : std::runtime_error {
  explicit ClosureViolation(const std::string& what)
      : std::runtime_error(what) {}
};

inline constexpr long kDefaultCellBudget = 1L << 27;

/// Copies per axis for gluing identical blocks.
struct GluingSpec {
  std::vector<int> copies;
  explicit GluingSpec(std::vector<int> m);
  static GluingSpec uniform(int n, int m);
};

/// Subcomplex of the canonical cubical decomposition of T^n on an r_0 x ...
/// x r_{n-1} vertex grid with periodic identification.
///
/// A d-cell is a pair (direction set, base vertex); the full torus has
/// C(n, d) * prod(r_i) of them. Occupancy is one bitset per dimension. All
/// complexes built here are full subcomplexes of their active vertex set, so
/// the closure property (every face of an included cell is included) holds by
/// construction; it can be revalidated with closure_ok().
class PeriodicCubicalComplex {
 public:
  PeriodicCubicalComplex(int dimension, std::vector<int> resolution);

  static PeriodicCubicalComplex full_torus(int dimension,
                                           std::vector<int> resolution);

  /// Builds the full subcomplex on the given active vertex set: a d-cell is
  /// included iff all of its 2^d corners are active.
  static PeriodicCubicalComplex from_active_vertices(
      int dimension, std::vector<int> resolution,
      const std::vector<std::uint64_t>& active);

  int dimension() const { return n_; }
  const std::vector<int>& resolution() const { return res_; }
  long vertex_count() const { return vertices_; }

  /// Number of included d-cells.
  long cells(int d) const;
  /// Number of d-cells of the full torus at this resolution.
  long capacity(int d) const;
  std::vector<long> cell_counts() const;
  long euler_characteristic() const;

  /// Direction bitmasks of dimension d, ascending; the slot index of a mask
  /// is its position in this list.
  const std::vector<int>& masks(int d) const { return masks_[d]; }

  bool cell_included(int d, int slot, long vertex) const;

  /// Base vertex shifted one step along the given axis (periodic).
  long vertex_neighbor(long vertex, int axis) const;

  bool closure_ok() const;
  bool subset_of(const PeriodicCubicalComplex& other) const;
  bool operator==(const PeriodicCubicalComplex& other) const;

  /// Occupancy tiled `copies` times per axis on the refined grid; the
  /// combinatorial counterpart of scaling wave vectors.
  PeriodicCubicalComplex tiled(const GluingSpec& spec,
                               long budget = kDefaultCellBudget) const;

  /// Connected components of the 1-skeleton by union-find: the independent
  /// cross-check for beta_0. Empty complex has 0 components.
  long component_count() const;

  const std::vector<std::uint64_t>& occupancy(int d) const { return occ_[d]; }

 private:
  void set_cell(int d, int slot, long vertex);

  int n_ = 0;
  std::vector<int> res_;
  long vertices_ = 0;
  std::vector<long> stride_;
  std::vector<std::vector<int>> masks_;
  std::vector<int> mask_slot_;  // mask value -> slot within its dimension
  std::vector<std::vector<std::uint64_t>> occ_;
};

/// Betti numbers over one prime field.
struct BettiVector {
  std::vector<long> beta;  // beta_0 .. beta_n
  int field_char = 2;
  bool operator==(const BettiVector&) const = default;
};

struct RasterizeResult {
  PeriodicCubicalComplex complex;
  /// Set when |U(vertex) - E| < 1e-12 somewhere: E sits on a grid value and
  /// ties resolved as inclusion; perturb E by ~1e-6 to silence.
  bool degenerate_level = false;
};

/// Rasterizes the domain of possible motions {U <= E}: a vertex is active iff
/// U(x) <= E, and the full subcomplex on active vertices is returned.
/// Resolutions must be >= 8 per axis and prod(r_i) <= budget.
RasterizeResult rasterize_sublevel(const TrigPotential& potential,
                                   EnergyLevel energy,
                                   std::vector<int> resolution,
                                   long budget = kDefaultCellBudget);
RasterizeResult rasterize_sublevel(const TrigPotential& potential,
                                   EnergyLevel energy, int resolution,
                                   long budget = kDefaultCellBudget);

/// Wave-vector scaling: the analytic realization of gluing copies of the
/// fundamental block along opposite faces.
TrigPotential glue(const TrigPotential& potential, const GluingSpec& spec);

PeriodicCubicalComplex glue_complex(const PeriodicCubicalComplex& complex,
                                    const GluingSpec& spec,
                                    long budget = kDefaultCellBudget);

/// beta_d = #d-cells - rank d_d - rank d_{d+1}, ranks by sparse Gaussian
/// elimination over GF(p). GF(2) uses unsigned incidence; odd p uses the
/// signed incidence of the canonical cubical orientation.
BettiVector betti(const PeriodicCubicalComplex& complex, int field_char = 2);

struct ScanRow {
  double energy = 0.0;
  BettiVector betti;
  std::vector<long> cell_counts;
  bool degenerate_level = false;
  long wall_ms = 0;
};

/// One Betti vector per energy (list must be sorted ascending); checks that
/// the rasterized complexes are nested. Energies are processed by a bounded
/// worker pool with slot-indexed results, so the output order and content do
/// not depend on the thread count.
std::vector<ScanRow> betti_scan(const TrigPotential& potential,
                                const std::vector<double>& energies,
                                std::vector<int> resolution, int field_char,
                                long budget = kDefaultCellBudget,
                                int threads = 1);

}  // namespace torusmech
