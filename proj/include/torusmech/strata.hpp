#pragma once

#include "torusmech/model.hpp"
#include "torusmech/observables.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace torusmech {

struct SampleFailure : std::runtime_error {
  explicit SampleFailure(const std::string& what) : std::runtime_error(what) {}
};

/// A critical point of a one-dimensional factor potential.
struct CriticalPoint {
  double x = 0.0;
  double value = 0.0;
  bool is_min = false;
};

/// Everything known about one separable factor F_i = y_i^2 / (2 G_ii) + V_i.
///
/// Single-trig factors (Example-3 style a cos(k x) or a sin(k x)) get exact
/// closed-form critical structure; multi-term factors fall back to numerical
/// critical-value finding by derivative sign-change bisection.
struct FactorPortrait {
  int index = 0;      // configuration axis
  double mass = 1.0;  // G_ii
  TrigPotential potential;  // one-dimensional slice, offset excluded
  double offset = 0.0;      // constant term carried by this factor
  bool single_trig = false;
  int wave_number = 0;      // k for single-trig factors
  double amplitude = 0.0;   // signed a for single-trig factors
  bool degenerate = false;  // free factor: no critical structure in x
  std::vector<CriticalPoint> critical_points;
  std::vector<double> critical_values;  // sorted, deduplicated, offset included
  double vmin = 0.0;
  double vmax = 0.0;
  double argmin = 0.0;  // some x achieving vmin

  FactorPortrait() : potential(1) {}

  /// V_i(x) including the offset.
  double value_at(double x) const;
  double derivative_at(double x) const;
  /// n-th derivative of V_i, exact termwise (trig derivatives cycle).
  double derivative_n_at(double x, int order) const;
};

FactorPortrait make_factor_portrait(int axis, double mass,
                                    const TrigPotential& slice,
                                    double offset);

/// Portraits of all factors of a separable system. The potential's constant
/// term rides with factor 0, matching separable_integrals.
std::vector<FactorPortrait> factor_portraits(const TorusModel& model,
                                             const TrigPotential& potential);

enum class ComponentKind : int { Circle = 0, Point = 1, Line = 2 };

const char* to_string(ComponentKind k);

/// One kind of invariant component of a factor level set in the (x, y)
/// cylinder: periodic orbit circles, equilibrium points, or open separatrix
/// branches.
struct LayerComponent {
  ComponentKind kind;
  int multiplicity;
  bool operator==(const LayerComponent&) const = default;
};

/// Component census of the factor level set {y^2/(2 G) + V(x) = c}.
std::vector<LayerComponent> classify_factor_level(const FactorPortrait& f,
                                                  double c);

/// Product stratum type T^a x R^b with its multiplicity inside a layer.
struct StratumSignature {
  int torus_rank = 0;
  int line_rank = 0;
  long count = 0;
  int dim() const { return torus_rank + line_rank; }
  bool operator==(const StratumSignature&) const = default;
};

/// One cell of the momentum cell complex: a product of per-factor pieces
/// (open intervals between consecutive critical values, or critical
/// singletons). Cells whose momentum values cannot occur (a factor below its
/// minimum) are kept with in_image = false and an empty layer.
struct MomentumCell {
  std::vector<int> piece;  // per-factor piece index
  int dim = 0;
  bool in_image = false;
  std::vector<StratumSignature> layer;
};

/// One per-factor piece of momentum space.
struct CellPiece {
  bool is_point = false;
  double lo = 0.0;  // for points lo == hi == the critical value
  double hi = 0.0;  // +inf encoded by the unbounded flag
  bool unbounded_above = false;
  bool unbounded_below = false;
  bool in_image = false;
  double representative() const;
  /// Interior sample at fraction t in (0,1); points return their value.
  double sample(double t) const;
};

class MomentumCellComplex {
 public:
  MomentumCellComplex(std::vector<FactorPortrait> factors);

  int dimension() const { return static_cast<int>(factors_.size()); }
  const std::vector<FactorPortrait>& factors() const { return factors_; }
  const std::vector<CellPiece>& pieces(int factor) const {
    return pieces_.at(factor);
  }
  const std::vector<MomentumCell>& cells() const { return cells_; }

  long cell_count(int dim, bool in_image_only) const;

  /// Index of the unique cell containing the momentum value c.
  std::size_t locate(const Eigen::VectorXd& c, double tol = 1e-9) const;

  nlohmann::ordered_json to_json() const;
  /// Rows of the stratum table: cell, piece indices, dim, in_image, and the
  /// layer signatures.
  std::vector<std::vector<std::string>> stratum_table() const;

 private:
  std::vector<FactorPortrait> factors_;
  std::vector<std::vector<CellPiece>> pieces_;
  std::vector<MomentumCell> cells_;
};

/// Builds the finite cell complex of momentum values for a separable system.
MomentumCellComplex build_cell_complex(const TorusModel& model,
                                       const TrigPotential& potential);

/// Result of checking the three non-degeneracy clauses on a separable system:
/// finiteness (structural), rank == stratum dimension at constructed sample
/// points, and constancy of the layer census across each cell.
struct NondegeneracyReport {
  struct StratumCheck {
    std::size_t cell = 0;
    int expected_dim = 0;
    std::vector<int> observed_ranks;
    bool ok = true;
  };
  bool pass = true;
  long cell_count = 0;
  std::vector<StratumCheck> strata;
  std::vector<int> degenerate_factors;
  std::vector<std::string> notes;
  std::string summary() const;
};

NondegeneracyReport verify_nondegeneracy(const TorusModel& model,
                                         const TrigPotential& potential,
                                         int samples_per_cell = 5);

/// Projection classes of the factor cycles of a Liouville torus over an
/// n-cell: rotation factors wind once in their coordinate, oscillation
/// factors project to contractible arcs.
struct TorusTriviality {
  bool non_trivial = false;
  std::vector<std::vector<int>> factor_classes;  // one lattice vector per factor
};

TorusTriviality torus_triviality(const MomentumCellComplex& complex,
                                 std::size_t cell_index);

}  // namespace torusmech
