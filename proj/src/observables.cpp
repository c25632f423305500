#include "torusmech/observables.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace torusmech {

namespace {

bool all_zero(const std::vector<int>& v) {
  return std::all_of(v.begin(), v.end(), [](int k) { return k == 0; });
}

struct ObsKeyLess {
  bool operator()(const ObsTerm& a, const ObsTerm& b) const {
    if (a.ypow != b.ypow) return a.ypow < b.ypow;
    if (a.wave != b.wave) return a.wave < b.wave;
    return a.kind < b.kind;
  }
};

std::vector<ObsTerm> canonicalize(int n, std::vector<ObsTerm> in) {
  std::vector<ObsTerm> out;
  out.reserve(in.size());
  for (ObsTerm& t : in) {
    if (static_cast<int>(t.ypow.size()) != n ||
        static_cast<int>(t.wave.size()) != n)
      throw std::invalid_argument("observable term arity mismatch");
    for (int a : t.ypow)
      if (a < 0) throw std::invalid_argument("negative momentum power");
    if (all_zero(t.wave)) {
      if (t.kind == TrigKind::Sin) continue;  // sin(0) == 0
    } else {
      // First nonzero wave entry positive; sin is odd, cos is even.
      for (int k : t.wave) {
        if (k > 0) break;
        if (k < 0) {
          for (int& e : t.wave) e = -e;
          if (t.kind == TrigKind::Sin) t.coeff = -t.coeff;
          break;
        }
      }
    }
    if (t.coeff == 0) continue;
    out.push_back(std::move(t));
  }
  std::sort(out.begin(), out.end(), ObsKeyLess{});
  std::vector<ObsTerm> merged;
  for (ObsTerm& t : out) {
    if (!merged.empty() && merged.back().ypow == t.ypow &&
        merged.back().wave == t.wave && merged.back().kind == t.kind) {
      merged.back().coeff += t.coeff;
    } else {
      merged.push_back(std::move(t));
    }
  }
  std::erase_if(merged, [](const ObsTerm& t) { return t.coeff == 0; });
  return merged;
}

std::vector<int> wave_sum(const std::vector<int>& a, const std::vector<int>& b,
                          int sign) {
  std::vector<int> r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + sign * b[i];
  return r;
}

// Value of trig(m * pi/2) as an exact integer in {-1, 0, 1}.
int quarter_pi_trig(TrigKind kind, long m) {
  int q = static_cast<int>(((m % 4) + 4) % 4);
  static constexpr int cos_table[4] = {1, 0, -1, 0};
  static constexpr int sin_table[4] = {0, 1, 0, -1};
  return kind == TrigKind::Cos ? cos_table[q] : sin_table[q];
}

Rational rational_pow(const Rational& base, int e) {
  Rational r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// Exact Gauss-Jordan inverse; n <= 6, entries widened from doubles.
std::vector<std::vector<Rational>> rational_inverse(const Eigen::MatrixXd& g) {
  const int n = static_cast<int>(g.rows());
  std::vector<std::vector<Rational>> a(n, std::vector<Rational>(2 * n, 0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a[i][j] = Rational(g(i, j));
    a[i][n + i] = 1;
  }
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    for (int r = col; r < n; ++r)
      if (a[r][col] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) throw std::invalid_argument("metric is singular");
    std::swap(a[col], a[piv]);
    Rational inv = Rational(1) / a[col][col];
    for (int j = 0; j < 2 * n; ++j) a[col][j] *= inv;
    for (int r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0) continue;
      Rational f = a[r][col];
      for (int j = 0; j < 2 * n; ++j) a[r][j] -= f * a[col][j];
    }
  }
  std::vector<std::vector<Rational>> inv(n, std::vector<Rational>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inv[i][j] = a[i][n + j];
  return inv;
}

}  // namespace

Observable::Observable(int dimension) : n_(dimension) {
  if (n_ < 1) throw std::invalid_argument("observable dimension must be >= 1");
}

Observable::Observable(int dimension, std::vector<ObsTerm> terms)
    : n_(dimension), terms_(canonicalize(dimension, std::move(terms))) {
  if (n_ < 1) throw std::invalid_argument("observable dimension must be >= 1");
}

Observable Observable::constant(int dimension, const Rational& c) {
  ObsTerm t{c, std::vector<int>(dimension, 0), std::vector<int>(dimension, 0),
            TrigKind::Cos};
  return Observable(dimension, {std::move(t)});
}

Observable Observable::momentum(int dimension, int i) {
  if (i < 0 || i >= dimension)
    throw std::invalid_argument("momentum index out of range");
  ObsTerm t{1, std::vector<int>(dimension, 0), std::vector<int>(dimension, 0),
            TrigKind::Cos};
  t.ypow[i] = 1;
  return Observable(dimension, {std::move(t)});
}

Observable Observable::wave(int dimension, std::vector<int> wave_vector,
                            TrigKind kind, const Rational& c) {
  ObsTerm t{c, std::vector<int>(dimension, 0), std::move(wave_vector), kind};
  return Observable(dimension, {std::move(t)});
}

Observable Observable::from_potential(const TrigPotential& potential) {
  std::vector<ObsTerm> terms;
  const int n = potential.dimension();
  for (const TrigTerm& t : potential.terms())
    terms.push_back(
        {Rational(t.amplitude), std::vector<int>(n, 0), t.wave, t.kind});
  return Observable(n, std::move(terms));
}

Observable Observable::operator+(const Observable& o) const {
  if (n_ != o.n_) throw std::invalid_argument("observable dimension mismatch");
  std::vector<ObsTerm> terms = terms_;
  terms.insert(terms.end(), o.terms_.begin(), o.terms_.end());
  return Observable(n_, std::move(terms));
}

Observable Observable::operator-() const {
  std::vector<ObsTerm> terms = terms_;
  for (ObsTerm& t : terms) t.coeff = -t.coeff;
  return Observable(n_, std::move(terms));
}

Observable Observable::operator-(const Observable& o) const {
  return *this + (-o);
}

Observable Observable::scaled(const Rational& c) const {
  std::vector<ObsTerm> terms = terms_;
  for (ObsTerm& t : terms) t.coeff *= c;
  return Observable(n_, std::move(terms));
}

Observable Observable::operator*(const Observable& o) const {
  if (n_ != o.n_) throw std::invalid_argument("observable dimension mismatch");
  std::vector<ObsTerm> terms;
  terms.reserve(2 * terms_.size() * o.terms_.size());
  const Rational half(1, 2);
  for (const ObsTerm& a : terms_) {
    for (const ObsTerm& b : o.terms_) {
      std::vector<int> ypow(n_);
      for (int i = 0; i < n_; ++i) ypow[i] = a.ypow[i] + b.ypow[i];
      Rational c = half * a.coeff * b.coeff;
      std::vector<int> plus = wave_sum(a.wave, b.wave, +1);
      std::vector<int> minus = wave_sum(a.wave, b.wave, -1);
      if (a.kind == TrigKind::Cos && b.kind == TrigKind::Cos) {
        // cos A cos B = (cos(A-B) + cos(A+B)) / 2
        terms.push_back({c, ypow, std::move(minus), TrigKind::Cos});
        terms.push_back({c, std::move(ypow), std::move(plus), TrigKind::Cos});
      } else if (a.kind == TrigKind::Sin && b.kind == TrigKind::Sin) {
        // sin A sin B = (cos(A-B) - cos(A+B)) / 2
        terms.push_back({c, ypow, std::move(minus), TrigKind::Cos});
        terms.push_back({-c, std::move(ypow), std::move(plus), TrigKind::Cos});
      } else if (a.kind == TrigKind::Sin && b.kind == TrigKind::Cos) {
        // sin A cos B = (sin(A+B) + sin(A-B)) / 2
        terms.push_back({c, ypow, std::move(plus), TrigKind::Sin});
        terms.push_back({c, std::move(ypow), std::move(minus), TrigKind::Sin});
      } else {
        // cos A sin B = (sin(A+B) - sin(A-B)) / 2
        terms.push_back({c, ypow, std::move(plus), TrigKind::Sin});
        terms.push_back({-c, std::move(ypow), std::move(minus), TrigKind::Sin});
      }
    }
  }
  return Observable(n_, std::move(terms));
}

bool Observable::operator==(const Observable& o) const {
  return n_ == o.n_ && terms_.size() == o.terms_.size() &&
         std::equal(terms_.begin(), terms_.end(), o.terms_.begin(),
                    [](const ObsTerm& a, const ObsTerm& b) {
                      return a.coeff == b.coeff && a.ypow == b.ypow &&
                             a.wave == b.wave && a.kind == b.kind;
                    });
}

Observable Observable::dx(int i) const {
  if (i < 0 || i >= n_) throw std::invalid_argument("dx index out of range");
  std::vector<ObsTerm> terms;
  for (const ObsTerm& t : terms_) {
    if (t.wave[i] == 0) continue;
    ObsTerm d = t;
    if (t.kind == TrigKind::Cos) {
      d.coeff = -t.coeff * t.wave[i];
      d.kind = TrigKind::Sin;
    } else {
      d.coeff = t.coeff * t.wave[i];
      d.kind = TrigKind::Cos;
    }
    terms.push_back(std::move(d));
  }
  return Observable(n_, std::move(terms));
}

Observable Observable::dy(int i) const {
  if (i < 0 || i >= n_) throw std::invalid_argument("dy index out of range");
  std::vector<ObsTerm> terms;
  for (const ObsTerm& t : terms_) {
    if (t.ypow[i] == 0) continue;
    ObsTerm d = t;
    d.coeff = t.coeff * t.ypow[i];
    d.ypow[i] -= 1;
    terms.push_back(std::move(d));
  }
  return Observable(n_, std::move(terms));
}

double Observable::eval(const PhasePoint& p) const {
  if (p.dimension() != n_)
    throw std::invalid_argument("observable evaluated at wrong dimension");
  double sum = 0.0;
  for (const ObsTerm& t : terms_) {
    double v = t.coeff.convert_to<double>();
    for (int i = 0; i < n_; ++i)
      for (int e = 0; e < t.ypow[i]; ++e) v *= p.y[i];
    double phase = 0.0;
    for (int i = 0; i < n_; ++i) phase += t.wave[i] * p.x[i];
    v *= t.kind == TrigKind::Cos ? std::cos(phase) : std::sin(phase);
    sum += v;
  }
  return sum;
}

double Observable::eval_dyadic(const PhasePoint& p) const {
  if (p.dimension() != n_)
    throw std::invalid_argument("observable evaluated at wrong dimension");
  Rational sum = 0;
  for (const ObsTerm& t : terms_) {
    Rational v = t.coeff;
    for (int i = 0; i < n_; ++i)
      if (t.ypow[i] > 0) v *= rational_pow(Rational(p.y[i]), t.ypow[i]);
    double phase = 0.0;
    for (int i = 0; i < n_; ++i) phase += t.wave[i] * p.x[i];
    double w = t.kind == TrigKind::Cos ? std::cos(phase) : std::sin(phase);
    v *= Rational(w);
    sum += v;
  }
  return sum.convert_to<double>();
}

Rational Observable::eval_exact(const std::vector<long>& x_quarter_pi,
                                const std::vector<Rational>& y) const {
  if (static_cast<int>(x_quarter_pi.size()) != n_ ||
      static_cast<int>(y.size()) != n_)
    throw std::invalid_argument("exact evaluation arity mismatch");
  Rational sum = 0;
  for (const ObsTerm& t : terms_) {
    long m = 0;
    for (int i = 0; i < n_; ++i) m += t.wave[i] * x_quarter_pi[i];
    int trig = quarter_pi_trig(t.kind, m);
    if (trig == 0) continue;
    Rational v = t.coeff * trig;
    for (int i = 0; i < n_; ++i)
      if (t.ypow[i] > 0) v *= rational_pow(y[i], t.ypow[i]);
    sum += v;
  }
  return sum;
}

int Observable::y_degree() const {
  int deg = 0;
  for (const ObsTerm& t : terms_) {
    int d = 0;
    for (int a : t.ypow) d += a;
    deg = std::max(deg, d);
  }
  return deg;
}

std::string Observable::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const ObsTerm& t : terms_) {
    Rational c = t.coeff;
    if (!first) os << (c < 0 ? " - " : " + ");
    if (first && c < 0) os << "-";
    first = false;
    Rational ac = abs(c);
    bool unit = ac == 1;
    bool wrote_factor = false;
    if (!unit) {
      os << ac;
      wrote_factor = true;
    }
    for (int i = 0; i < n_; ++i) {
      if (t.ypow[i] == 0) continue;
      if (wrote_factor) os << " ";
      os << "y" << (i + 1);
      if (t.ypow[i] > 1) os << "^" << t.ypow[i];
      wrote_factor = true;
    }
    if (!all_zero(t.wave)) {
      if (wrote_factor) os << " ";
      os << (t.kind == TrigKind::Cos ? "cos(" : "sin(");
      bool first_w = true;
      for (int i = 0; i < n_; ++i) {
        if (t.wave[i] == 0) continue;
        int k = t.wave[i];
        if (!first_w)
          os << (k < 0 ? " - " : " + ");
        else if (k < 0)
          os << "-";
        int a = std::abs(k);
        if (a != 1) os << a << " ";
        os << "x" << (i + 1);
        first_w = false;
      }
      os << ")";
      wrote_factor = true;
    }
    if (!wrote_factor) os << ac;
  }
  return os.str();
}

nlohmann::ordered_json Observable::to_json() const {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const ObsTerm& t : terms_) {
    nlohmann::ordered_json jt;
    double d = t.coeff.convert_to<double>();
    if (Rational(d) == t.coeff)
      jt["amplitude"] = d;
    else
      jt["amplitude"] = t.coeff.str();
    jt["wave"] = t.wave;
    jt["kind"] = torusmech::to_string(t.kind);
    jt["ypow"] = t.ypow;
    arr.push_back(std::move(jt));
  }
  nlohmann::ordered_json j;
  j["dimension"] = n_;
  j["terms"] = std::move(arr);
  return j;
}

Observable Observable::from_json(const nlohmann::json& j) {
  int n = j.at("dimension").get<int>();
  std::vector<ObsTerm> terms;
  for (const auto& jt : j.at("terms")) {
    ObsTerm t;
    const auto& amp = jt.at("amplitude");
    if (amp.is_string())
      t.coeff = Rational(amp.get<std::string>());
    else
      t.coeff = Rational(amp.get<double>());
    t.ypow = jt.at("ypow").get<std::vector<int>>();
    t.wave = jt.at("wave").get<std::vector<int>>();
    std::string kind = jt.at("kind").get<std::string>();
    if (kind != "cos" && kind != "sin")
      throw std::invalid_argument("term kind must be cos or sin");
    t.kind = kind == "cos" ? TrigKind::Cos : TrigKind::Sin;
    terms.push_back(std::move(t));
  }
  return Observable(n, std::move(terms));
}

Observable poisson_bracket(const Observable& f, const Observable& g) {
  if (f.dimension() != g.dimension())
    throw std::invalid_argument("poisson bracket dimension mismatch");
  const int n = f.dimension();
  Observable acc(n);
  for (int i = 0; i < n; ++i) {
    acc = acc + f.dy(i) * g.dx(i) - g.dy(i) * f.dx(i);
  }
  return acc;
}

Observable hamiltonian_observable(const TorusModel& model,
                                  const TrigPotential& potential) {
  if (model.dimension() != potential.dimension())
    throw std::invalid_argument("hamiltonian dimension mismatch");
  const int n = model.dimension();
  auto ginv = rational_inverse(model.metric());
  std::vector<ObsTerm> terms;
  const Rational half(1, 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Rational c = (i == j) ? half * ginv[i][i] : ginv[i][j];
      if (c == 0) continue;
      ObsTerm t{c, std::vector<int>(n, 0), std::vector<int>(n, 0), TrigKind::Cos};
      t.ypow[i] += 1;
      t.ypow[j] += 1;
      terms.push_back(std::move(t));
    }
  }
  Observable kinetic(n, std::move(terms));
  return kinetic + Observable::from_potential(potential);
}

std::vector<Observable> separable_integrals(const TorusModel& model,
                                            const TrigPotential& potential) {
  if (model.dimension() != potential.dimension())
    throw std::invalid_argument("separable integrals dimension mismatch");
  if (!model.metric_is_diagonal())
    throw NonDiagonalMetricError("metric must be diagonal for separation");
  const int n = model.dimension();
  for (const TrigTerm& t : potential.terms()) {
    int support = 0;
    for (int k : t.wave)
      if (k != 0) ++support;
    if (support > 1)
      throw NonSeparableError("potential term couples coordinates: wave " +
                              [&] {
                                std::string s = "(";
                                for (int i = 0; i < n; ++i)
                                  s += std::to_string(t.wave[i]) +
                                       (i + 1 < n ? "," : ")");
                                return s;
                              }());
  }
  std::vector<Observable> integrals;
  integrals.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::vector<ObsTerm> terms;
    ObsTerm kin{Rational(1) / (2 * Rational(model.metric()(i, i))),
                std::vector<int>(n, 0), std::vector<int>(n, 0), TrigKind::Cos};
    kin.ypow[i] = 2;
    terms.push_back(std::move(kin));
    for (const TrigTerm& t : potential.terms()) {
      bool constant = all_zero(t.wave);
      if (constant ? i == 0 : t.wave[i] != 0)
        terms.push_back(
            {Rational(t.amplitude), std::vector<int>(n, 0), t.wave, t.kind});
    }
    integrals.emplace_back(n, std::move(terms));
  }
  return integrals;
}

MomentumValue momentum_map_eval(const std::vector<Observable>& integrals,
                                const PhasePoint& p) {
  Eigen::VectorXd c(static_cast<Eigen::Index>(integrals.size()));
  for (size_t i = 0; i < integrals.size(); ++i) {
    if (integrals[i].dimension() != p.dimension())
      throw std::invalid_argument("momentum map dimension mismatch");
    c[static_cast<Eigen::Index>(i)] = integrals[i].eval_dyadic(p);
  }
  return MomentumValue{std::move(c)};
}

int rank_dF(const std::vector<Observable>& integrals, const PhasePoint& p,
            double tol) {
  if (tol <= 0) throw std::invalid_argument("rank tolerance must be positive");
  const int m = static_cast<int>(integrals.size());
  const int n = p.dimension();
  Eigen::MatrixXd jac(m, 2 * n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      jac(i, j) = integrals[i].dx(j).eval(p);
      jac(i, n + j) = integrals[i].dy(j).eval(p);
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(jac);
  Eigen::MatrixXd r = qr.matrixR();
  double max_pivot = std::abs(r(0, 0));
  double threshold = std::max(tol * max_pivot, 1e-12);
  int rank = 0;
  for (int i = 0; i < std::min<int>(m, 2 * n); ++i)
    if (std::abs(r(i, i)) > threshold) ++rank;
  return rank;
}

int rank_dF_exact(const std::vector<Observable>& integrals,
                  const std::vector<long>& x_quarter_pi,
                  const std::vector<Rational>& y) {
  const int m = static_cast<int>(integrals.size());
  const int n = static_cast<int>(y.size());
  std::vector<std::vector<Rational>> jac(m, std::vector<Rational>(2 * n));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      jac[i][j] = integrals[i].dx(j).eval_exact(x_quarter_pi, y);
      jac[i][n + j] = integrals[i].dy(j).eval_exact(x_quarter_pi, y);
    }
  int rank = 0;
  int row = 0;
  for (int col = 0; col < 2 * n && row < m; ++col) {
    int piv = -1;
    for (int r = row; r < m; ++r)
      if (jac[r][col] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    std::swap(jac[row], jac[piv]);
    for (int r = row + 1; r < m; ++r) {
      if (jac[r][col] == 0) continue;
      Rational f = jac[r][col] / jac[row][col];
      for (int c2 = col; c2 < 2 * n; ++c2) jac[r][c2] -= f * jac[row][c2];
    }
    ++rank;
    ++row;
  }
  return rank;
}

std::string InvolutionReport::summary() const {
  std::ostringstream os;
  os << (pass ? "PASS" : "FAIL") << ": " << pairs_checked
     << " bracket(s) checked";
  if (!failures.empty()) {
    os << "; nonzero:";
    for (const Failure& f : failures) {
      if (f.i < 0)
        os << " {H,F" << (f.j + 1) << "} = " << f.bracket;
      else
        os << " {F" << (f.i + 1) << ",F" << (f.j + 1) << "} = " << f.bracket;
    }
  }
  return os.str();
}

InvolutionReport involution_report(const std::vector<Observable>& integrals,
                                   const Observable* hamiltonian) {
  InvolutionReport report;
  const int m = static_cast<int>(integrals.size());
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      Observable b = poisson_bracket(integrals[i], integrals[j]);
      ++report.pairs_checked;
      if (!b.is_zero()) {
        report.pass = false;
        report.failures.push_back({i, j, b.to_string()});
      }
    }
  }
  if (hamiltonian != nullptr) {
    for (int j = 0; j < m; ++j) {
      Observable b = poisson_bracket(*hamiltonian, integrals[j]);
      ++report.pairs_checked;
      if (!b.is_zero()) {
        report.pass = false;
        report.failures.push_back({-1, j, b.to_string()});
      }
    }
  }
  return report;
}

}  // namespace torusmech
