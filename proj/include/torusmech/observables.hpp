#pragma once

#include "torusmech/model.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace torusmech {

/// Exact coefficient type of the observable algebra. Doubles convert in
/// losslessly (every finite double is dyadic); conversion back to double is
/// the single rounding step at evaluation boundaries.
using Rational = boost::multiprecision::cpp_rational;

/// One term c * y^alpha * trig(wave . x) of an observable.
struct ObsTerm {
  Rational coeff;
  std::vector<int> ypow;  // multi-index alpha over the momenta
  std::vector<int> wave;  // canonical integer wave vector
  TrigKind kind = TrigKind::Cos;
};

/// Exact phase-space function: a finite sum of terms c * y^alpha * trig(k.x).
///
/// The term list is canonical: sorted by (ypow, wave, kind), one term per key,
/// no zero coefficients, waves normalized so the first nonzero entry is
/// positive, and a zero wave only with kind cos. The algebra is closed under
/// addition, multiplication (via product-to-sum trig identities) and partial
/// derivatives, each of which returns a canonical Observable. Coefficients
/// stay exact rationals throughout; "is zero" is therefore decidable, which is
/// what makes involution certificates exact rather than tolerance-based.
class Observable {
 public:
  explicit Observable(int dimension);  // the zero observable
  Observable(int dimension, std::vector<ObsTerm> terms);

  static Observable constant(int dimension, const Rational& c);
  /// The coordinate momentum y_i.
  static Observable momentum(int dimension, int i);
  /// c * trig(wave . x).
  static Observable wave(int dimension, std::vector<int> wave_vector,
                         TrigKind kind, const Rational& c = 1);
  /// Lift of a potential (exact dyadic coefficients, y-degree zero).
  static Observable from_potential(const TrigPotential& potential);

  int dimension() const { return n_; }
  const std::vector<ObsTerm>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  Observable operator+(const Observable& o) const;
  Observable operator-(const Observable& o) const;
  Observable operator*(const Observable& o) const;
  Observable operator-() const;
  Observable scaled(const Rational& c) const;
  bool operator==(const Observable& o) const;

  /// Partial derivative in the i-th angle.
  Observable dx(int i) const;
  /// Partial derivative in the i-th momentum.
  Observable dy(int i) const;

  /// Numeric evaluation: double accumulation in canonical term order.
  double eval(const PhasePoint& p) const;

  /// Evaluation with exact rational accumulation. Trig factors are evaluated
  /// in double precision and widened; used where a single final rounding is
  /// wanted.
  double eval_dyadic(const PhasePoint& p) const;

  /// Exact evaluation at angles that are integer multiples of pi/2 (where
  /// sin/cos take values in {-1, 0, 1}) and exact rational momenta.
  Rational eval_exact(const std::vector<long>& x_quarter_pi,
                      const std::vector<Rational>& y) const;

  /// Highest total y-degree across terms (0 for a pure potential).
  int y_degree() const;

  std::string to_string() const;

  nlohmann::ordered_json to_json() const;
  static Observable from_json(const nlohmann::json& j);

 private:
  int n_;
  std::vector<ObsTerm> terms_;
};

/// {f, g} = d_y f d_x g - d_y g d_x f, exact and canonical. The symplectic
/// form dy ^ dx is represented operationally by this bracket.
Observable poisson_bracket(const Observable& f, const Observable& g);

/// H = 1/2 g^{ij} y_i y_j + U as an exact Observable. The metric inverse is
/// computed over the rationals (entries of G are widened exactly), so the
/// result is an exact lift of the Hamiltonian.
Observable hamiltonian_observable(const TorusModel& model,
                                  const TrigPotential& potential);

struct NonSeparableError : std::runtime_error {
  explicit NonSeparableError(const std::string& what) : std::runtime_error(what) {}
};
struct NonDiagonalMetricError : std::runtime_error {
  explicit NonDiagonalMetricError(const std::string& what)
      : std::runtime_error(what) {}
};

/// First integrals F_i = 1/2 y_i^2 / G_ii + (terms of U on x_i) of a
/// separable system. Sum F_i = H exactly (the constant term of U, if any, is
/// carried by F_1). Throws NonDiagonalMetricError / NonSeparableError.
std::vector<Observable> separable_integrals(const TorusModel& model,
                                            const TrigPotential& potential);

/// Value of the momentum map F = (F_1, ..., F_n).
struct MomentumValue {
  Eigen::VectorXd c;
};

MomentumValue momentum_map_eval(const std::vector<Observable>& integrals,
                                const PhasePoint& p);

/// Numerical rank of the n x 2n matrix of gradients dF at p, via
/// column-pivoted QR. Pivots below max(tol * max_pivot, 1e-12) count as zero,
/// so a matrix of pure roundoff noise has rank 0.
int rank_dF(const std::vector<Observable>& integrals, const PhasePoint& p,
            double tol = 1e-9);

/// Exact rank of dF over the rationals at a quarter-pi lattice point.
int rank_dF_exact(const std::vector<Observable>& integrals,
                  const std::vector<long>& x_quarter_pi,
                  const std::vector<Rational>& y);

/// Pairwise involution certificate. PASS iff every bracket {F_i, F_j} (and
/// {H, F_i} when a Hamiltonian is supplied) is symbolically zero.
struct InvolutionReport {
  struct Failure {
    int i, j;  // i == -1 encodes the Hamiltonian slot
    std::string bracket;
  };
  bool pass = true;
  int pairs_checked = 0;
  std::vector<Failure> failures;
  std::string summary() const;
};

InvolutionReport involution_report(const std::vector<Observable>& integrals,
                                   const Observable* hamiltonian = nullptr);

}  // namespace torusmech
