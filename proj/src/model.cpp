#include "torusmech/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace torusmech {

double reduce_angle(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("angle is not finite");
  double r = std::fmod(v, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;  // the negative branch can land exactly on 2*pi
  if (r == 0.0) r = 0.0;     // normalize -0.0
  return r;
}

Eigen::VectorXd reduce_angles(Eigen::VectorXd x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = reduce_angle(x[i]);
  return x;
}

const char* to_string(TrigKind k) { return k == TrigKind::Cos ? "cos" : "sin"; }

namespace {

bool wave_is_zero(const std::vector<int>& w) {
  return std::all_of(w.begin(), w.end(), [](int k) { return k == 0; });
}

// Flips the wave so its first nonzero entry is positive; returns the sign
// applied (cos is even, sin is odd in the wave vector).
int canonicalize_wave(std::vector<int>& w) {
  for (int k : w) {
    if (k > 0) return 1;
    if (k < 0) {
      for (int& e : w) e = -e;
      return -1;
    }
  }
  return 1;
}

struct TermKeyLess {
  bool operator()(const TrigTerm& a, const TrigTerm& b) const {
    if (a.wave != b.wave) return a.wave < b.wave;
    return a.kind < b.kind;
  }
};

std::vector<TrigTerm> canonicalize_terms(int n, std::vector<TrigTerm> in) {
  std::vector<TrigTerm> out;
  out.reserve(in.size());
  for (TrigTerm& t : in) {
    if (static_cast<int>(t.wave.size()) != n)
      throw std::invalid_argument("potential term wave length != dimension");
    if (!std::isfinite(t.amplitude))
      throw std::invalid_argument("potential amplitude is not finite");
    if (wave_is_zero(t.wave)) {
      if (t.kind == TrigKind::Sin) continue;  // sin(0) == 0
    } else {
      int s = canonicalize_wave(t.wave);
      if (s < 0 && t.kind == TrigKind::Sin) t.amplitude = -t.amplitude;
    }
    if (t.amplitude == 0.0) continue;
    out.push_back(std::move(t));
  }
  std::sort(out.begin(), out.end(), TermKeyLess{});
  // Merge duplicate (wave, kind) keys.
  std::vector<TrigTerm> merged;
  for (TrigTerm& t : out) {
    if (!merged.empty() && merged.back().wave == t.wave &&
        merged.back().kind == t.kind) {
      merged.back().amplitude += t.amplitude;
    } else {
      merged.push_back(std::move(t));
    }
  }
  std::erase_if(merged, [](const TrigTerm& t) { return t.amplitude == 0.0; });
  return merged;
}

}  // namespace

TrigPotential::TrigPotential(int dimension) : n_(dimension) {
  if (n_ < 1 || n_ > 16)
    throw std::invalid_argument("potential dimension out of range");
}

TrigPotential::TrigPotential(int dimension, std::vector<TrigTerm> terms)
    : n_(dimension), terms_(canonicalize_terms(dimension, std::move(terms))) {
  if (n_ < 1 || n_ > 16)
    throw std::invalid_argument("potential dimension out of range");
}

double TrigPotential::operator()(const Eigen::VectorXd& x) const {
  return value_and_gradient(x, nullptr);
}

Eigen::VectorXd TrigPotential::gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g(n_);
  value_and_gradient(x, &g);
  return g;
}

double TrigPotential::value_and_gradient(const Eigen::VectorXd& x,
                                         Eigen::VectorXd* grad) const {
  if (static_cast<int>(x.size()) != n_)
    throw std::invalid_argument("potential evaluated at wrong dimension");
  double xr[16];
  for (int i = 0; i < n_; ++i) xr[i] = reduce_angle(x[i]);
  if (grad != nullptr) grad->setZero();
  double sum = 0.0;
  for (const TrigTerm& t : terms_) {
    double phase = 0.0;
    for (int i = 0; i < n_; ++i) phase += t.wave[i] * xr[i];
    double c = std::cos(phase), s = std::sin(phase);
    sum += t.amplitude * (t.kind == TrigKind::Cos ? c : s);
    if (grad != nullptr) {
      double d = t.kind == TrigKind::Cos ? -t.amplitude * s : t.amplitude * c;
      for (int i = 0; i < n_; ++i) (*grad)[i] += d * t.wave[i];
    }
  }
  return sum;
}

bool TrigPotential::separable() const {
  for (const TrigTerm& t : terms_) {
    int support = 0;
    for (int k : t.wave)
      if (k != 0) ++support;
    if (support > 1) return false;
  }
  return true;
}

TrigPotential TrigPotential::axis_slice(int axis) const {
  if (axis < 0 || axis >= n_) throw std::invalid_argument("axis out of range");
  std::vector<TrigTerm> slice;
  for (const TrigTerm& t : terms_) {
    if (wave_is_zero(t.wave)) continue;
    bool on_axis = t.wave[axis] != 0;
    for (int i = 0; i < n_ && on_axis; ++i)
      if (i != axis && t.wave[i] != 0) on_axis = false;
    if (on_axis) slice.push_back({t.amplitude, {t.wave[axis]}, t.kind});
  }
  return TrigPotential(1, std::move(slice));
}

double TrigPotential::constant_term() const {
  for (const TrigTerm& t : terms_)
    if (wave_is_zero(t.wave)) return t.amplitude;
  return 0.0;
}

TrigPotential TrigPotential::scaled_waves(const std::vector<int>& m) const {
  if (static_cast<int>(m.size()) != n_)
    throw std::invalid_argument("scaling vector length != dimension");
  for (int mi : m)
    if (mi < 1) throw std::invalid_argument("wave scaling entries must be >= 1");
  std::vector<TrigTerm> scaled = terms_;
  for (TrigTerm& t : scaled)
    for (int i = 0; i < n_; ++i) t.wave[i] *= m[i];
  return TrigPotential(n_, std::move(scaled));
}

namespace {

// 1-D extremum search: dense scan followed by ternary refinement.
double extremum_1d(const TrigPotential& slice, bool maximize) {
  int max_k = 1;
  for (const TrigTerm& t : slice.terms()) max_k = std::max(max_k, std::abs(t.wave[0]));
  const int samples = 512 * max_k;
  double best_x = 0.0;
  double best = maximize ? -1e300 : 1e300;
  Eigen::VectorXd x(1);
  for (int j = 0; j < samples; ++j) {
    x[0] = kTwoPi * j / samples;
    double v = slice(x);
    if (maximize ? v > best : v < best) {
      best = v;
      best_x = x[0];
    }
  }
  double lo = best_x - kTwoPi / samples, hi = best_x + kTwoPi / samples;
  for (int it = 0; it < 200; ++it) {
    double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    x[0] = m1;
    double v1 = slice(x);
    x[0] = m2;
    double v2 = slice(x);
    if (maximize ? v1 < v2 : v1 > v2)
      lo = m1;
    else
      hi = m2;
  }
  x[0] = 0.5 * (lo + hi);
  return slice(x);
}

double joint_extremum(const TrigPotential& u, bool maximize) {
  const int n = u.dimension();
  int per_axis = std::max(4, static_cast<int>(std::floor(std::pow(2e6, 1.0 / n))));
  per_axis = std::min(per_axis, 256);
  std::vector<int> idx(n, 0);
  Eigen::VectorXd x(n);
  double best = maximize ? -1e300 : 1e300;
  Eigen::VectorXd best_x = Eigen::VectorXd::Zero(n);
  while (true) {
    for (int i = 0; i < n; ++i) x[i] = kTwoPi * idx[i] / per_axis;
    double v = u(x);
    if (maximize ? v > best : v < best) {
      best = v;
      best_x = x;
    }
    int i = 0;
    for (; i < n; ++i) {
      if (++idx[i] < per_axis) break;
      idx[i] = 0;
    }
    if (i == n) break;
  }
  // Local gradient ascent/descent polish.
  Eigen::VectorXd cur = best_x;
  double step = kTwoPi / per_axis;
  double sign = maximize ? 1.0 : -1.0;
  for (int it = 0; it < 400 && step > 1e-14; ++it) {
    Eigen::VectorXd cand = cur + sign * step * u.gradient(cur).normalized();
    if (u.gradient(cur).norm() == 0.0) break;
    if (sign * (u(cand) - u(cur)) > 0)
      cur = cand;
    else
      step *= 0.5;
  }
  double polished = u(cur);
  return maximize ? std::max(best, polished) : std::min(best, polished);
}

double extremum(const TrigPotential& u, bool maximize) {
  double c = u.constant_term();
  if (u.separable()) {
    double v = c;
    for (int i = 0; i < u.dimension(); ++i) {
      TrigPotential slice = u.axis_slice(i);
      if (!slice.empty()) v += extremum_1d(slice, maximize);
    }
    return v;
  }
  return joint_extremum(u, maximize);
}

}  // namespace

double TrigPotential::max_value() const { return extremum(*this, true); }
double TrigPotential::min_value() const { return extremum(*this, false); }

TorusModel::TorusModel(int dimension, Eigen::MatrixXd metric)
    : n_(dimension), metric_(std::move(metric)) {
  if (n_ < 1 || n_ > 6)
    throw std::invalid_argument("torus dimension must satisfy 1 <= n <= 6");
  if (metric_.rows() != n_ || metric_.cols() != n_)
    throw std::invalid_argument("metric shape does not match dimension");
  if (!metric_.allFinite())
    throw std::invalid_argument("metric entries must be finite");
  if (metric_ != metric_.transpose())
    throw std::invalid_argument("metric must be exactly symmetric");
  llt_.compute(metric_);
  if (llt_.info() != Eigen::Success)
    throw std::invalid_argument("metric must be positive definite");
  inverse_ = llt_.solve(Eigen::MatrixXd::Identity(n_, n_));
  diagonal_ = true;
  for (int i = 0; i < n_ && diagonal_; ++i)
    for (int j = 0; j < n_; ++j)
      if (i != j && metric_(i, j) != 0.0) {
        diagonal_ = false;
        break;
      }
}

TorusModel TorusModel::euclidean(int dimension) {
  return TorusModel(dimension, Eigen::MatrixXd::Identity(dimension, dimension));
}

Eigen::VectorXd TorusModel::apply_inverse(const Eigen::VectorXd& v) const {
  if (static_cast<int>(v.size()) != n_)
    throw std::invalid_argument("vector dimension does not match metric");
  return llt_.solve(v);
}

PhasePoint::PhasePoint(Eigen::VectorXd angles, Eigen::VectorXd momenta)
    : x(reduce_angles(std::move(angles))), y(std::move(momenta)) {
  if (x.size() != y.size())
    throw std::invalid_argument("phase point angle/momentum size mismatch");
  if (!y.allFinite()) throw std::invalid_argument("momenta must be finite");
}

EnergyLevel::EnergyLevel(double e) : value(e) {
  if (!std::isfinite(e)) throw std::invalid_argument("energy must be finite");
}

double eval_potential(const TrigPotential& potential, const Eigen::VectorXd& x) {
  return potential(x);
}

double hamiltonian(const TorusModel& model, const TrigPotential& potential,
                   const PhasePoint& p) {
  if (model.dimension() != p.dimension() ||
      potential.dimension() != p.dimension())
    throw std::invalid_argument("hamiltonian dimension mismatch");
  double kinetic = 0.5 * p.y.dot(model.apply_inverse(p.y));
  return kinetic + potential(p.x);
}

PhasePoint legendre(const TorusModel& model, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& xdot) {
  if (model.dimension() != x.size() || x.size() != xdot.size())
    throw std::invalid_argument("legendre dimension mismatch");
  return PhasePoint(x, model.metric() * xdot);
}

Eigen::VectorXd legendre_inverse(const TorusModel& model, const PhasePoint& p) {
  if (model.dimension() != p.dimension())
    throw std::invalid_argument("legendre dimension mismatch");
  return model.apply_inverse(p.y);
}

double jacobi_factor(const TrigPotential& potential, EnergyLevel energy,
                     const Eigen::VectorXd& x) {
  return energy.value - potential(x);
}

bool in_domain(const TrigPotential& potential, EnergyLevel energy,
               const Eigen::VectorXd& x) {
  return potential(x) <= energy.value;
}

}  // namespace torusmech
