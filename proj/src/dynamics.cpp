#include "torusmech/dynamics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace torusmech {

PhaseTrajectory::PhaseTrajectory(int dimension, double t0, double dt,
                                 std::string method)
    : n_(dimension), t0_(t0), dt_(dt), method_(std::move(method)) {}

PhasePoint PhaseTrajectory::point(long s) const {
  Eigen::VectorXd x(n_), y(n_);
  for (int i = 0; i < n_; ++i) {
    x[i] = x_[s * n_ + i];
    y[i] = y_[s * n_ + i];
  }
  return PhasePoint(std::move(x), std::move(y));
}

double PhaseTrajectory::lifted_coordinate(long s, int axis) const {
  return x_[s * n_ + axis] + kTwoPi * winding_[s * n_ + axis];
}

void PhaseTrajectory::reserve(long samples) {
  x_.reserve(samples * n_);
  y_.reserve(samples * n_);
  winding_.reserve(samples * n_);
  energy_.reserve(samples);
  for (auto& f : integrals_) f.reserve(samples);
}

void PhaseTrajectory::append(const Eigen::VectorXd& x,
                             const std::vector<long>& winding,
                             const Eigen::VectorXd& y, double h,
                             const std::vector<double>& f_values) {
  for (int i = 0; i < n_; ++i) {
    x_.push_back(x[i]);
    y_.push_back(y[i]);
    winding_.push_back(winding[i]);
  }
  energy_.push_back(h);
  for (std::size_t i = 0; i < integrals_.size(); ++i)
    integrals_[i].push_back(f_values[i]);
}

PhaseTrajectory integrate(const TorusModel& model,
                          const TrigPotential& potential, const PhasePoint& p0,
                          double dt, long steps,
                          const std::vector<Observable>* integrals,
                          long record_stride) {
  const int n = model.dimension();
  if (potential.dimension() != n || p0.dimension() != n)
    throw std::invalid_argument("integration dimension mismatch");
  if (dt == 0.0 || !std::isfinite(dt))
    throw std::invalid_argument("time step must be nonzero and finite");
  if (steps < 1) throw std::invalid_argument("need at least one step");
  if (record_stride < 1 || record_stride > steps)
    throw std::invalid_argument("stride must lie in [1, steps]");

  PhaseTrajectory traj(n, 0.0, dt, "stormer-verlet");
  traj.set_stride(record_stride);
  if (integrals != nullptr) traj.init_integrals(static_cast<int>(integrals->size()));
  traj.reserve(steps / record_stride + 2);

  Eigen::VectorXd x = p0.x, y = p0.y;
  Eigen::VectorXd du(n), velocity(n);
  std::vector<long> winding(n, 0);
  std::vector<double> f_values(integrals ? integrals->size() : 0);

  auto record = [&]() {
    PhasePoint p(x, y);
    if (integrals != nullptr)
      for (std::size_t i = 0; i < integrals->size(); ++i)
        f_values[i] = (*integrals)[i].eval(p);
    traj.append(x, winding, y, hamiltonian(model, potential, p), f_values);
  };
  record();

  for (long s = 1; s <= steps; ++s) {
    // kick - drift - kick
    potential.value_and_gradient(x, &du);
    y -= 0.5 * dt * du;
    velocity.noalias() = model.metric_inverse() * y;
    for (int i = 0; i < n; ++i) {
      double lifted = x[i] + dt * velocity[i];
      double wrapped = reduce_angle(lifted);
      winding[i] += std::llround((lifted - wrapped) / kTwoPi);
      x[i] = wrapped;
    }
    potential.value_and_gradient(x, &du);
    y -= 0.5 * dt * du;
    if (s % record_stride == 0) record();
  }
  return traj;
}

ConfinementReport check_confinement(const PhaseTrajectory& trajectory,
                                    const TrigPotential& potential,
                                    EnergyLevel energy) {
  ConfinementReport report;
  report.max_excursion = -std::numeric_limits<double>::infinity();
  for (long s = 0; s < trajectory.size(); ++s) {
    double excursion = potential(trajectory.point(s).x) - energy.value;
    if (excursion > report.max_excursion) {
      report.max_excursion = excursion;
      report.worst_sample = s;
    }
  }
  report.ok = report.max_excursion <= report.tolerance;
  return report;
}

double integral_drift(const PhaseTrajectory& trajectory,
                      const std::vector<Observable>& integrals) {
  if (trajectory.size() < 1) return 0.0;
  std::vector<double> reference;
  PhasePoint first = trajectory.point(0);
  for (const Observable& f : integrals) reference.push_back(f.eval(first));
  double drift = 0.0;
  for (long s = 1; s < trajectory.size(); ++s) {
    PhasePoint p = trajectory.point(s);
    for (std::size_t i = 0; i < integrals.size(); ++i)
      drift = std::max(drift, std::abs(integrals[i].eval(p) - reference[i]));
  }
  return drift;
}

namespace {

// Root of V(x) = c inside [a, b], where V - c changes sign between a and b.
double bisect_level(const FactorPortrait& f, double c, double a, double b) {
  double wa = f.value_at(a) - c;
  for (int it = 0; it < 200 && std::abs(b - a) > 1e-14; ++it) {
    double mid = 0.5 * (a + b);
    double wm = f.value_at(mid) - c;
    if ((wa < 0.0) == (wm < 0.0)) {
      a = mid;
      wa = wm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

// Nearest critical point beyond x_m (in the +-1 direction, cyclic lifts)
// whose value exceeds c: the barrier confining the oscillation.
double well_barrier(const FactorPortrait& f, double c, double x_m, int dir) {
  double best = dir > 0 ? x_m + 2 * kTwoPi : x_m - 2 * kTwoPi;
  bool found = false;
  for (const CriticalPoint& p : f.critical_points) {
    if (p.value <= c) continue;
    for (int j = -2; j <= 2; ++j) {
      double cand = p.x + kTwoPi * j;
      if (dir > 0 ? (cand > x_m && cand < best) : (cand < x_m && cand > best)) {
        best = cand;
        found = true;
      }
    }
  }
  if (!found) throw SeparatrixEnergy("no barrier above the requested level");
  return best;
}

// Integral of dx / sqrt(c - V) from a turning point x_t to the well bottom
// x_m, desingularized by the substitution x = x_t + (x_m - x_t) u^2. The
// level is taken as V(x_t) itself; near the turning point the gap
// V(x_t) - V(x_t + h) cancels catastrophically in doubles, so it switches to
// a Taylor expansion there.
double half_well_time(const FactorPortrait& f, double c, double x_t,
                      double x_m) {
  (void)c;
  const double span = x_m - x_t;
  const double level = f.value_at(x_t);
  const double d1 = f.derivative_n_at(x_t, 1);
  const double d2 = f.derivative_n_at(x_t, 2);
  const double d3 = f.derivative_n_at(x_t, 3);
  auto integrand = [&](double u) {
    double h = span * u * u;
    double gap;
    if (std::abs(h) < 1e-5) {
      gap = -(h * d1 + 0.5 * h * h * d2 + h * h * h / 6.0 * d3);
    } else {
      gap = level - f.value_at(x_t + h);
    }
    if (gap <= 0.0) {
      // only reachable at u ~ 0 where the limit is finite
      double slope = std::abs(d1);
      return slope > 0.0 ? 2.0 * std::sqrt(std::abs(span) / slope) : 0.0;
    }
    return 2.0 * std::abs(span) * u / std::sqrt(gap);
  };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, 0.0, 1.0, 12, 1e-12);
}

}  // namespace

double factor_period(const FactorPortrait& factor, double c) {
  const double scale = std::max(1.0, std::abs(factor.vmax));
  for (double v : factor.critical_values)
    if (std::abs(c - v) <= 1e-12 * scale)
      throw SeparatrixEnergy("period diverges at critical level c = " +
                             std::to_string(c));
  if (c < factor.vmin)
    throw BelowMinimum("level below the factor minimum");

  if (c > factor.vmax) {
    // rotation: time for x to advance 2*pi
    auto integrand = [&](double x) {
      return 1.0 / std::sqrt(c - factor.value_at(x));
    };
    double t = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        integrand, 0.0, kTwoPi, 12, 1e-12);
    return std::sqrt(factor.mass / 2.0) * t;
  }

  // oscillation in the deepest well: turning points between the argmin and
  // the nearest barriers above c on either side
  double x_m = factor.argmin;
  if (factor.value_at(x_m) >= c)
    throw BelowMinimum("no oscillation well at this level");
  double left = bisect_level(factor, c, well_barrier(factor, c, x_m, -1), x_m);
  double right = bisect_level(factor, c, x_m, well_barrier(factor, c, x_m, +1));
  double time = half_well_time(factor, c, left, x_m) +
                half_well_time(factor, c, right, x_m);
  return std::sqrt(2.0 * factor.mass) * time;
}

FrequencyVector frequency_vector(const std::vector<FactorPortrait>& factors,
                                 const Eigen::VectorXd& c,
                                 const std::vector<int>& winding_signs) {
  const int n = static_cast<int>(factors.size());
  if (static_cast<int>(c.size()) != n ||
      static_cast<int>(winding_signs.size()) != n)
    throw std::invalid_argument("frequency vector arity mismatch");
  FrequencyVector out;
  out.omega.resize(n);
  out.rotational.resize(n);
  for (int i = 0; i < n; ++i) {
    double period = factor_period(factors[i], c[i]);
    bool rotation = c[i] > factors[i].vmax;
    out.rotational[i] = rotation;
    double sign = winding_signs[i] >= 0 ? 1.0 : -1.0;
    out.omega[i] = (rotation ? sign : 1.0) * kTwoPi / period;
  }
  return out;
}

double measure_winding_period(const TorusModel& model,
                              const TrigPotential& potential,
                              const PhasePoint& p0, int axis, double dt,
                              long steps) {
  PhaseTrajectory traj = integrate(model, potential, p0, dt, steps);
  const long total = traj.size();
  const long start = total / 5;  // discard the leading 20%
  // least-squares slope of the unwrapped angle against time
  double st = 0, sx = 0, stt = 0, stx = 0;
  long count = 0;
  for (long s = start; s < total; ++s) {
    double t = traj.time(s);
    double xl = traj.lifted_coordinate(s, axis);
    st += t;
    sx += xl;
    stt += t * t;
    stx += t * xl;
    ++count;
  }
  double denom = count * stt - st * st;
  double slope = (count * stx - st * sx) / denom;
  if (slope == 0.0) throw std::invalid_argument("no winding detected");
  return kTwoPi / std::abs(slope);
}

namespace {

std::vector<int> primitive_class(const std::vector<int>& cls) {
  int g = 0;
  for (int c : cls) g = std::gcd(g, std::abs(c));
  if (g == 0) return cls;
  std::vector<int> out(cls.size());
  for (std::size_t i = 0; i < cls.size(); ++i) out[i] = cls[i] / g;
  // fix the overall sign so the first nonzero entry is positive
  for (int c : out) {
    if (c > 0) break;
    if (c < 0) {
      for (int& e : out) e = -e;
      break;
    }
  }
  return out;
}

}  // namespace

CollinearityReport collinearity_check(
    const std::vector<FactorPortrait>& factors, const Eigen::VectorXd& c1,
    const std::vector<int>& class1, const Eigen::VectorXd& c2,
    const std::vector<int>& class2, double tol) {
  CollinearityReport report;
  const int n = static_cast<int>(factors.size());
  for (int i = 0; i < n; ++i) {
    if (c1[i] <= factors[i].vmax || c2[i] <= factors[i].vmax) {
      report.note = "cell is not rotational in factor " + std::to_string(i + 1);
      return report;
    }
  }
  std::vector<int> alpha1 = primitive_class(class1);
  std::vector<int> alpha2 = primitive_class(class2);
  if (alpha1 != alpha2) {
    report.note = "classes are not multiples of a common primitive class";
    return report;
  }
  report.precondition_met = true;

  auto signs = [&](const std::vector<int>& cls) {
    std::vector<int> s(cls.size());
    for (std::size_t i = 0; i < cls.size(); ++i) s[i] = cls[i] >= 0 ? 1 : -1;
    return s;
  };
  FrequencyVector w1 = frequency_vector(factors, c1, signs(class1));
  FrequencyVector w2 = frequency_vector(factors, c2, signs(class2));
  double dot = w1.omega.dot(w2.omega);
  double norms = w1.omega.norm() * w2.omega.norm();
  double sin2 = std::max(0.0, 1.0 - (dot * dot) / (norms * norms));
  report.deviation = std::sqrt(sin2);
  report.collinear = report.deviation < tol;
  return report;
}

}  // namespace torusmech
