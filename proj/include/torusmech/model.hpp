#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

namespace torusmech {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduce an angle to its canonical representative in [0, 2*pi).
///
/// fmod is exact for the given floating-point arguments, so two inputs reduce
/// to identical bits whenever their difference is an exactly representable
/// multiple of 2*pi. All angle-valued state in this library is stored reduced.
double reduce_angle(double v);
Eigen::VectorXd reduce_angles(Eigen::VectorXd x);

enum class TrigKind : std::uint8_t { Cos = 0, Sin = 1 };

const char* to_string(TrigKind k);

/// One wave: amplitude * trig(wave . x).
struct TrigTerm {
  double amplitude = 0.0;
  std::vector<int> wave;
  TrigKind kind = TrigKind::Cos;
};

/// Finite sum of cosine/sine waves with integer wave vectors on the
/// 2*pi-periodic n-torus.
///
/// Terms are kept in canonical form: the first nonzero wave entry is positive
/// (a sign flip negates the amplitude of sine terms and leaves cosine terms
/// unchanged), duplicate (wave, kind) keys are merged, exact-zero amplitudes
/// are dropped, a zero wave vector is only admitted with kind cos (the
/// constant term), and the list is sorted by (wave, kind). The sorted order
/// fixes the summation order, so evaluation does not depend on the order in
/// which terms were supplied.
class TrigPotential {
 public:
  explicit TrigPotential(int dimension);  // the zero potential
  TrigPotential(int dimension, std::vector<TrigTerm> terms);

  int dimension() const { return n_; }
  const std::vector<TrigTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  /// U(x). Coordinates are reduced to [0, 2*pi) before any trig evaluation.
  double operator()(const Eigen::VectorXd& x) const;

  /// dU/dx evaluated at x.
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

  /// Allocation-free combined evaluation for hot loops: returns U(x) and, if
  /// grad is non-null, writes dU/dx into it (must be presized to n).
  double value_and_gradient(const Eigen::VectorXd& x,
                            Eigen::VectorXd* grad) const;

  /// True when every term's wave vector is supported on a single coordinate
  /// (constant terms allowed). Such potentials split into one-dimensional
  /// factors.
  bool separable() const;

  /// Terms whose wave is supported on the given axis, as a one-dimensional
  /// potential in that coordinate. Constant terms are excluded.
  TrigPotential axis_slice(int axis) const;

  /// Value of the constant (zero-wave) term, 0 if absent.
  double constant_term() const;

  /// Wave vectors scaled componentwise by m >= 1: the analytic form of tiling
  /// m_i identical blocks per axis and re-identifying opposite faces.
  TrigPotential scaled_waves(const std::vector<int>& m) const;

  /// Maximum of U over the torus. Exact (up to roundoff) for separable
  /// potentials via per-axis search, otherwise estimated by grid scan plus
  /// local refinement.
  double max_value() const;
  double min_value() const;

 private:
  int n_;
  std::vector<TrigTerm> terms_;
};

/// Flat n-torus with a constant symmetric positive-definite metric G.
/// Coordinates are 2*pi-periodic angles. 1 <= n <= 6.
class TorusModel {
 public:
  TorusModel(int dimension, Eigen::MatrixXd metric);

  static TorusModel euclidean(int dimension);

  int dimension() const { return n_; }
  const Eigen::MatrixXd& metric() const { return metric_; }
  const Eigen::MatrixXd& metric_inverse() const { return inverse_; }
  bool metric_is_diagonal() const { return diagonal_; }

  /// G^{-1} v via the cached Cholesky factorization.
  Eigen::VectorXd apply_inverse(const Eigen::VectorXd& v) const;

 private:
  int n_;
  Eigen::MatrixXd metric_;
  Eigen::MatrixXd inverse_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  bool diagonal_;
};

/// Point of T*T^n. Angles are reduced to [0, 2*pi) on construction, and every
/// operation producing a PhasePoint re-reduces; that is part of the type's
/// contract.
struct PhasePoint {
  Eigen::VectorXd x;
  Eigen::VectorXd y;

  PhasePoint(Eigen::VectorXd angles, Eigen::VectorXd momenta);

  int dimension() const { return static_cast<int>(x.size()); }
};

/// Total energy value. Must be finite.
struct EnergyLevel {
  double value;
  explicit EnergyLevel(double e);
};

double eval_potential(const TrigPotential& potential, const Eigen::VectorXd& x);

/// H(x, y) = 1/2 y^T G^{-1} y + U(x). With an empty potential this is the
/// geodesic Hamiltonian of the flat metric.
double hamiltonian(const TorusModel& model, const TrigPotential& potential,
                   const PhasePoint& p);

/// Legendre transform: velocities to momenta, y = G xdot.
PhasePoint legendre(const TorusModel& model, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& xdot);

/// Inverse Legendre transform: xdot = G^{-1} y.
Eigen::VectorXd legendre_inverse(const TorusModel& model, const PhasePoint& p);

/// E - U(x), the conformal factor of the Jacobi metric g_J = (E - U) g.
/// A negative value signals the exterior of the domain of possible motions.
double jacobi_factor(const TrigPotential& potential, EnergyLevel energy,
                     const Eigen::VectorXd& x);

/// True iff U(x) <= E.
bool in_domain(const TrigPotential& potential, EnergyLevel energy,
               const Eigen::VectorXd& x);

}  // namespace torusmech
