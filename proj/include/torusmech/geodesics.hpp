#pragma once

#include "torusmech/model.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace torusmech {

struct DegenerateEnergy : std::runtime_error {
  explicit DegenerateEnergy(const std::string& what)
      : std::runtime_error(what) {}
};

/// Free homotopy class of loops on T^n, identified with Z^n.
struct HomotopyClass {
  std::vector<int> m;

  explicit HomotopyClass(std::vector<int> entries);

  int dimension() const { return static_cast<int>(m.size()); }
  bool is_zero() const;
  /// gcd of the entries is 1.
  bool primitive() const;
  HomotopyClass multiplied(int k) const;
};

/// Minimal closed geodesic length of the flat metric in a class: straight
/// lines minimize, so the length is 2*pi*sqrt(m^T G m).
double flat_minimal_length(const TorusModel& model, const HomotopyClass& alpha);

/// Discrete loop in a fixed lift class: rows are lifted configuration points
/// q_0 .. q_{N-1}; the closing segment runs to q_0 + 2*pi*m, so the homotopy
/// class is exact by construction rather than penalized.
struct GeodesicSearchResult {
  Eigen::MatrixXd loop;  // N x n lifted points
  std::vector<int> lift_class;
  double length = 0.0;
  bool converged = false;
  int restarts_used = 0;
  int best_restart = 0;
  std::uint64_t seed = 0;
  long iterations = 0;
};

struct GeodesicOptions {
  int discretization = 256;  // N
  int restarts = 8;
  std::uint64_t seed = 1789;
  double degenerate_margin = 1e-6;  // require E > max U + margin
  long max_iterations = 20000;
  double regularizer_weight = 1e-3;  // tangential spacing; dropped for polish
  double convergence_factor = 1e-8;  // grad max-norm < factor * length / N
  int threads = 1;
};

/// Discrete Jacobi length of a loop: sum over segments of
/// sqrt(E - U(midpoint)) * |dq|_G (midpoint rule).
double jacobi_loop_length(const TorusModel& model, const TrigPotential& potential,
                          double energy, const Eigen::MatrixXd& loop,
                          const HomotopyClass& alpha);

/// Analytic gradient of the discrete Jacobi length in the loop points.
Eigen::MatrixXd jacobi_loop_gradient(const TorusModel& model,
                                     const TrigPotential& potential,
                                     double energy, const Eigen::MatrixXd& loop,
                                     const HomotopyClass& alpha);

/// Gradient descent with backtracking line search on the discrete Jacobi
/// length, multi-start from the straight line plus seeded random
/// perturbations. Returns the best loop found; global minimality is not
/// certified.
GeodesicSearchResult jacobi_minimal_geodesic(const TorusModel& model,
                                             const TrigPotential& potential,
                                             double energy,
                                             const HomotopyClass& alpha,
                                             const GeodesicOptions& options = {});

struct DkRow {
  int k = 0;
  double length = 0.0;  // L_{k alpha}
  double dk = 0.0;      // L_{k alpha} / k
  bool converged = false;
};

/// Scans L_{k alpha} for k = 1..k_max with the discretization scaled
/// proportionally to k; reports d_k = L_{k alpha} / k and its argmin.
std::vector<DkRow> d_k_scan(const TorusModel& model,
                            const TrigPotential& potential, double energy,
                            const HomotopyClass& alpha, int k_max,
                            const GeodesicOptions& options = {});

}  // namespace torusmech
