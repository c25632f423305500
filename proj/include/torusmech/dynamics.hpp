#pragma once

#include "torusmech/model.hpp"
#include "torusmech/observables.hpp"
#include "torusmech/strata.hpp"

#include <string>
#include <vector>

namespace torusmech {

struct SeparatrixEnergy : std::runtime_error {
  explicit SeparatrixEnergy(const std::string& what)
      : std::runtime_error(what) {}
};
struct BelowMinimum : std::runtime_error {
  explicit BelowMinimum(const std::string& what) : std::runtime_error(what) {}
};

/// Sampled orbit of the Hamiltonian flow. Angles are stored reduced together
/// with integer winding counters, so the unwrapped lift x + 2*pi*w is exact.
class PhaseTrajectory {
 public:
  PhaseTrajectory(int dimension, double t0, double dt, std::string method);

  int dimension() const { return n_; }
  long size() const { return static_cast<long>(energy_.size()); }
  double time(long s) const { return t0_ + dt_ * stride_ * s; }
  double step() const { return dt_; }
  long stride() const { return stride_; }
  const std::string& method() const { return method_; }

  PhasePoint point(long s) const;
  double lifted_coordinate(long s, int axis) const;
  double energy(long s) const { return energy_[s]; }
  /// Recorded value of the i-th integral at sample s (if integrals were
  /// supplied to integrate()).
  double integral(int i, long s) const { return integrals_[i][s]; }
  int integral_count() const { return static_cast<int>(integrals_.size()); }

  void set_stride(long stride) { stride_ = stride; }
  void reserve(long samples);
  void append(const Eigen::VectorXd& x, const std::vector<long>& winding,
              const Eigen::VectorXd& y, double h,
              const std::vector<double>& f_values);
  void init_integrals(int count) { integrals_.assign(count, {}); }

 private:
  int n_;
  double t0_, dt_;
  long stride_ = 1;
  std::string method_;
  std::vector<double> x_, y_;
  std::vector<long> winding_;
  std::vector<double> energy_;
  std::vector<std::vector<double>> integrals_;
};

/// Stormer-Verlet (kick-drift-kick) integration of H = y^T G^{-1} y / 2 + U.
/// The drift is exact for a constant metric and the kick exact from the
/// potential gradient, so the map is symplectic and time-reversible.
PhaseTrajectory integrate(const TorusModel& model,
                          const TrigPotential& potential, const PhasePoint& p0,
                          double dt, long steps,
                          const std::vector<Observable>* integrals = nullptr,
                          long record_stride = 1);

struct ConfinementReport {
  double max_excursion = 0.0;  // max over samples of U(x) - E
  long worst_sample = 0;
  double tolerance = 1e-6;
  bool ok = true;
};

/// Checks U(x(t)) <= E + 1e-6 along the trajectory.
ConfinementReport check_confinement(const PhaseTrajectory& trajectory,
                                    const TrigPotential& potential,
                                    EnergyLevel energy);

/// max over integrals and samples of |F_i(t) - F_i(0)|, evaluated from the
/// recorded phase points.
double integral_drift(const PhaseTrajectory& trajectory,
                      const std::vector<Observable>& integrals);

/// Period of the factor motion at level c: oscillation in the deepest well
/// for c between the minimum and the top critical value, full 2*pi winding
/// time above it. Quadrature with turning-point desingularization; critical
/// levels are rejected (SeparatrixEnergy) and c below the minimum throws
/// BelowMinimum.
double factor_period(const FactorPortrait& factor, double c);

/// Per-coordinate frequencies on a product level: rotation factors carry the
/// winding frequency sign(class) * 2*pi / T, oscillation factors the
/// libration frequency (flagged).
struct FrequencyVector {
  Eigen::VectorXd omega;
  std::vector<bool> rotational;
};

FrequencyVector frequency_vector(const std::vector<FactorPortrait>& factors,
                                 const Eigen::VectorXd& c,
                                 const std::vector<int>& winding_signs);

/// Winding period of one coordinate measured from a simulated trajectory:
/// linear regression of the unwrapped angle over the final 80% of samples.
double measure_winding_period(const TorusModel& model,
                              const TrigPotential& potential,
                              const PhasePoint& p0, int axis, double dt,
                              long steps);

struct CollinearityReport {
  bool precondition_met = false;  // classes are multiples of a common alpha
  bool collinear = false;
  double deviation = 0.0;  // |w1 x w2| / (|w1| |w2|)
  std::string note;
};

/// Collinearity probe: frequency vectors of two rotation-type product tori
/// whose closed orbits project to classes p*alpha and q*alpha must be
/// collinear.
CollinearityReport collinearity_check(
    const std::vector<FactorPortrait>& factors, const Eigen::VectorXd& c1,
    const std::vector<int>& class1, const Eigen::VectorXd& c2,
    const std::vector<int>& class2, double tol = 1e-8);

}  // namespace torusmech
