#include "torusmech/strata.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace torusmech {

namespace {

constexpr double kLevelTol = 1e-9;

Eigen::VectorXd one_d(double x) {
  Eigen::VectorXd v(1);
  v[0] = x;
  return v;
}

int max_wave(const TrigPotential& slice) {
  int k = 1;
  for (const TrigTerm& t : slice.terms()) k = std::max(k, std::abs(t.wave[0]));
  return k;
}

// Derivative sign-change bisection on [0, 2pi); roots to 1e-12.
std::vector<double> derivative_roots(const TrigPotential& slice) {
  const int samples = 4096 * max_wave(slice);
  auto dv = [&](double x) { return slice.gradient(one_d(x))[0]; };
  std::vector<double> roots;
  double prev = dv(0.0);
  for (int j = 1; j <= samples; ++j) {
    double x1 = kTwoPi * j / samples;
    double cur = dv(x1);
    if (prev == 0.0) {
      roots.push_back(kTwoPi * (j - 1) / samples);
    } else if ((prev < 0.0) != (cur < 0.0)) {
      double lo = kTwoPi * (j - 1) / samples, hi = x1;
      for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
        double mid = 0.5 * (lo + hi);
        if ((dv(lo) < 0.0) != (dv(mid) < 0.0))
          hi = mid;
        else
          lo = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev = cur;
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> dedup;
  for (double r : roots)
    if (dedup.empty() || r - dedup.back() > 1e-9) dedup.push_back(r);
  if (dedup.size() > 1 && dedup.front() + kTwoPi - dedup.back() < 1e-9)
    dedup.pop_back();
  return dedup;
}

}  // namespace

double FactorPortrait::value_at(double x) const {
  return offset + (potential.empty() ? 0.0 : potential(one_d(x)));
}

double FactorPortrait::derivative_at(double x) const {
  return potential.empty() ? 0.0 : potential.gradient(one_d(x))[0];
}

double FactorPortrait::derivative_n_at(double x, int order) const {
  if (order == 0) return value_at(x);
  double sum = 0.0;
  for (const TrigTerm& t : potential.terms()) {
    const int k = t.wave[0];
    double kx = k * reduce_angle(x);
    double scale = t.amplitude;
    for (int i = 0; i < order; ++i) scale *= k;
    // d^n/dx^n trig(kx) = k^n trig(kx + n pi/2)
    int q = order % 4;
    double v;
    if (t.kind == TrigKind::Cos)
      v = q == 0   ? std::cos(kx)
          : q == 1 ? -std::sin(kx)
          : q == 2 ? -std::cos(kx)
                   : std::sin(kx);
    else
      v = q == 0   ? std::sin(kx)
          : q == 1 ? std::cos(kx)
          : q == 2 ? -std::sin(kx)
                   : -std::cos(kx);
    sum += scale * v;
  }
  return sum;
}

FactorPortrait make_factor_portrait(int axis, double mass,
                                    const TrigPotential& slice,
                                    double offset) {
  if (slice.dimension() != 1)
    throw std::invalid_argument("factor portrait needs a 1-d slice");
  if (mass <= 0.0) throw std::invalid_argument("factor mass must be positive");
  FactorPortrait f;
  f.index = axis;
  f.mass = mass;
  f.potential = slice;
  f.offset = offset;

  if (slice.empty()) {
    // Free factor: F = y^2/(2G) + offset. The whole circle {y = 0} is
    // critical; the momentum map is degenerate over it.
    f.degenerate = true;
    f.vmin = f.vmax = offset;
    f.argmin = 0.0;
    f.critical_values = {offset};
    return f;
  }

  f.single_trig = slice.terms().size() == 1;
  if (f.single_trig) {
    const TrigTerm& t = slice.terms()[0];
    f.wave_number = std::abs(t.wave[0]);
    f.amplitude = t.amplitude;
    const int k = f.wave_number;
    const double a = t.amplitude;
    // trig'(k x) = 0 at the k maxima and k minima of the wave
    for (int j = 0; j < 2 * k; ++j) {
      double x;
      bool at_max;
      if (t.kind == TrigKind::Cos) {
        x = M_PI * j / k;  // cos(k x) = +-1
        at_max = (j % 2 == 0) == (a > 0);
      } else {
        x = (M_PI / 2 + M_PI * j) / k;  // sin(k x) = +-1
        at_max = (j % 2 == 0) == (a > 0);
      }
      f.critical_points.push_back(
          {x, offset + (at_max ? std::abs(a) : -std::abs(a)), !at_max});
    }
    f.vmin = offset - std::abs(a);
    f.vmax = offset + std::abs(a);
    f.critical_values = {f.vmin, f.vmax};
  } else {
    std::vector<double> roots = derivative_roots(slice);
    if (roots.empty())
      throw std::invalid_argument("factor potential has no critical points");
    for (double r : roots) {
      double v = f.value_at(r);
      double eps = 1e-5;
      bool is_min = f.value_at(r - eps) > v && f.value_at(r + eps) > v;
      f.critical_points.push_back({r, v, is_min});
    }
    f.vmin = std::numeric_limits<double>::infinity();
    f.vmax = -std::numeric_limits<double>::infinity();
    for (const CriticalPoint& p : f.critical_points) {
      f.vmin = std::min(f.vmin, p.value);
      f.vmax = std::max(f.vmax, p.value);
    }
    std::vector<double> values;
    for (const CriticalPoint& p : f.critical_points) values.push_back(p.value);
    std::sort(values.begin(), values.end());
    for (double v : values)
      if (f.critical_values.empty() || v - f.critical_values.back() > 1e-9)
        f.critical_values.push_back(v);
  }
  std::sort(
      f.critical_points.begin(), f.critical_points.end(),
      [](const CriticalPoint& a, const CriticalPoint& b) { return a.x < b.x; });
  double best = std::numeric_limits<double>::infinity();
  for (const CriticalPoint& p : f.critical_points)
    if (p.value < best) {
      best = p.value;
      f.argmin = p.x;
    }
  return f;
}

std::vector<FactorPortrait> factor_portraits(const TorusModel& model,
                                             const TrigPotential& potential) {
  if (!model.metric_is_diagonal())
    throw NonDiagonalMetricError("factor portraits need a diagonal metric");
  if (!potential.separable())
    throw NonSeparableError("factor portraits need a separable potential");
  std::vector<FactorPortrait> factors;
  for (int i = 0; i < model.dimension(); ++i)
    factors.push_back(make_factor_portrait(
        i, model.metric()(i, i), potential.axis_slice(i),
        i == 0 ? potential.constant_term() : 0.0));
  return factors;
}

const char* to_string(ComponentKind k) {
  switch (k) {
    case ComponentKind::Circle:
      return "circle";
    case ComponentKind::Point:
      return "point";
    default:
      return "line";
  }
}

namespace {

std::vector<LayerComponent> aggregate(std::map<ComponentKind, int> counts) {
  std::vector<LayerComponent> census;
  for (auto& [kind, mult] : counts)
    if (mult > 0) census.push_back({kind, mult});
  return census;
}

// Generic census by walking the arcs of {V < c} between boundary events.
std::vector<LayerComponent> classify_numeric(const FactorPortrait& f,
                                             double c) {
  const double tol =
      kLevelTol * std::max(1.0, std::abs(f.vmax) + std::abs(f.vmin));
  std::map<ComponentKind, int> counts;

  struct Event {
    double x;
    bool critical;
  };
  std::vector<Event> events;

  int points = 0;
  for (const CriticalPoint& p : f.critical_points) {
    if (std::abs(p.value - c) <= tol) {
      ++points;
      if (!p.is_min) events.push_back({p.x, true});  // saddle boundary
    }
  }
  counts[ComponentKind::Point] = points;

  // Simple crossings of V = c (turning points).
  const int samples = 4096 * max_wave(f.potential);
  auto w = [&](double x) { return c - f.value_at(x); };
  double prev = w(0.0);
  for (int j = 1; j <= samples; ++j) {
    double x1 = kTwoPi * j / samples;
    double cur = w(x1);
    if ((prev < 0.0) != (cur < 0.0)) {
      double lo = kTwoPi * (j - 1) / samples, hi = x1;
      for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
        double mid = 0.5 * (lo + hi);
        if ((w(lo) < 0.0) != (w(mid) < 0.0))
          hi = mid;
        else
          lo = mid;
      }
      double r = 0.5 * (lo + hi);
      bool near_critical = false;
      for (const Event& e : events)
        if (std::abs(e.x - r) < 1e-6 ||
            std::abs(std::abs(e.x - r) - kTwoPi) < 1e-6)
          near_critical = true;
      if (!near_critical) events.push_back({r, false});
    }
    prev = cur;
  }

  if (events.empty()) {
    if (c > f.vmax + tol)
      counts[ComponentKind::Circle] = 2;  // two rotation branches
    else if (points == 0 && c > f.vmin && w(f.argmin) > 0)
      counts[ComponentKind::Circle] = 1;
    return aggregate(std::move(counts));
  }

  std::sort(events.begin(), events.end(),
            [](const Event& a, const Event& b) { return a.x < b.x; });
  const std::size_t m = events.size();
  for (std::size_t j = 0; j < m; ++j) {
    const Event& left = events[j];
    const Event& right = events[(j + 1) % m];
    double span = (j + 1 < m) ? right.x - left.x : right.x + kTwoPi - left.x;
    double mid = left.x + 0.5 * span;
    if (w(mid) <= 0.0) continue;  // gap, not an arc of {V < c}
    if (!left.critical && !right.critical)
      counts[ComponentKind::Circle] += 1;
    else if (left.critical && right.critical)
      counts[ComponentKind::Line] += 2;  // upper and lower branch
    else
      counts[ComponentKind::Line] += 1;  // branch turning around one endpoint
  }
  return aggregate(std::move(counts));
}

}  // namespace

std::vector<LayerComponent> classify_factor_level(const FactorPortrait& f,
                                                  double c) {
  std::map<ComponentKind, int> counts;
  if (f.degenerate) {
    double c_eff = c - f.offset;
    if (c_eff > kLevelTol)
      counts[ComponentKind::Circle] = 2;
    else if (c_eff >= -kLevelTol)
      counts[ComponentKind::Circle] = 1;  // the critical circle y = 0
    return aggregate(std::move(counts));
  }
  if (!f.single_trig) return classify_numeric(f, c);

  const int k = f.wave_number;
  const double lo = f.vmin, hi = f.vmax;
  const double tol = kLevelTol * std::max(1.0, std::abs(hi));
  if (std::abs(c - lo) <= tol) {
    counts[ComponentKind::Point] = k;  // the k well bottoms
  } else if (std::abs(c - hi) <= tol) {
    // k hyperbolic points joined by 2k open separatrix branches
    counts[ComponentKind::Point] = k;
    counts[ComponentKind::Line] = 2 * k;
  } else if (c < lo) {
    // below the minimum: empty layer
  } else if (c < hi) {
    counts[ComponentKind::Circle] = k;  // one oscillation circle per well
  } else {
    counts[ComponentKind::Circle] = 2;  // two rotation branches
  }
  return aggregate(std::move(counts));
}

double CellPiece::representative() const { return sample(0.5); }

double CellPiece::sample(double t) const {
  if (is_point) return lo;
  if (unbounded_below) return hi - (0.5 + 2.0 * t);
  if (unbounded_above) return lo + 0.5 + 2.0 * t;
  return lo + t * (hi - lo);
}

namespace {

std::vector<CellPiece> factor_pieces(const FactorPortrait& f) {
  std::vector<CellPiece> pieces;
  const auto& v = f.critical_values;
  CellPiece below;
  below.lo = 0.0;
  below.hi = v.front();
  below.unbounded_below = true;
  below.in_image = false;  // a factor value never drops below its minimum
  pieces.push_back(below);
  for (std::size_t j = 0; j < v.size(); ++j) {
    CellPiece point;
    point.is_point = true;
    point.lo = point.hi = v[j];
    point.in_image = true;
    pieces.push_back(point);
    CellPiece interval;
    interval.lo = v[j];
    interval.in_image = true;
    if (j + 1 < v.size()) {
      interval.hi = v[j + 1];
    } else {
      interval.hi = 0.0;
      interval.unbounded_above = true;
    }
    pieces.push_back(interval);
  }
  return pieces;
}

// Componentwise product of factor censuses, aggregated by (a, b).
std::vector<StratumSignature> layer_product(
    const std::vector<std::vector<LayerComponent>>& censuses) {
  std::map<std::pair<int, int>, long> sig;
  std::vector<std::size_t> idx(censuses.size(), 0);
  for (const auto& c : censuses)
    if (c.empty()) return {};
  while (true) {
    int a = 0, b = 0;
    long count = 1;
    for (std::size_t i = 0; i < censuses.size(); ++i) {
      const LayerComponent& comp = censuses[i][idx[i]];
      if (comp.kind == ComponentKind::Circle) ++a;
      if (comp.kind == ComponentKind::Line) ++b;
      count *= comp.multiplicity;
    }
    sig[{a, b}] += count;
    std::size_t i = 0;
    for (; i < censuses.size(); ++i) {
      if (++idx[i] < censuses[i].size()) break;
      idx[i] = 0;
    }
    if (i == censuses.size()) break;
  }
  std::vector<StratumSignature> layer;
  for (auto& [ab, count] : sig) layer.push_back({ab.first, ab.second, count});
  return layer;
}

}  // namespace

MomentumCellComplex::MomentumCellComplex(std::vector<FactorPortrait> factors)
    : factors_(std::move(factors)) {
  if (factors_.empty())
    throw std::invalid_argument("cell complex needs at least one factor");
  for (const FactorPortrait& f : factors_) pieces_.push_back(factor_pieces(f));

  const int n = dimension();
  std::vector<int> idx(n, 0);
  while (true) {
    MomentumCell cell;
    cell.piece = idx;
    cell.in_image = true;
    cell.dim = 0;
    std::vector<std::vector<LayerComponent>> censuses;
    for (int i = 0; i < n; ++i) {
      const CellPiece& p = pieces_[i][idx[i]];
      if (!p.is_point) ++cell.dim;
      if (!p.in_image) cell.in_image = false;
      censuses.push_back(
          classify_factor_level(factors_[i], p.representative()));
    }
    cell.layer = cell.in_image ? layer_product(censuses)
                               : std::vector<StratumSignature>{};
    cells_.push_back(std::move(cell));
    int i = n - 1;
    for (; i >= 0; --i) {
      if (++idx[i] < static_cast<int>(pieces_[i].size())) break;
      idx[i] = 0;
    }
    if (i < 0) break;
  }
}

long MomentumCellComplex::cell_count(int dim, bool in_image_only) const {
  long count = 0;
  for (const MomentumCell& c : cells_)
    if (c.dim == dim && (!in_image_only || c.in_image)) ++count;
  return count;
}

std::size_t MomentumCellComplex::locate(const Eigen::VectorXd& c,
                                        double tol) const {
  const int n = dimension();
  if (static_cast<int>(c.size()) != n)
    throw std::invalid_argument("momentum value arity mismatch");
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) {
    const auto& pieces = pieces_[i];
    int found = -1;
    for (std::size_t j = 0; j < pieces.size() && found < 0; ++j) {
      const CellPiece& p = pieces[j];
      if (p.is_point) {
        if (std::abs(c[i] - p.lo) <= tol) found = static_cast<int>(j);
      } else {
        bool above = p.unbounded_below || c[i] > p.lo + tol;
        bool below = p.unbounded_above || c[i] < p.hi - tol;
        if (above && below) found = static_cast<int>(j);
      }
    }
    if (found < 0)
      throw std::invalid_argument("momentum value not located in any piece");
    idx[i] = found;
  }
  // cells_ is odometer-ordered with the last factor fastest
  std::size_t flat = 0;
  for (int i = 0; i < n; ++i)
    flat = flat * pieces_[i].size() + static_cast<std::size_t>(idx[i]);
  return flat;
}

nlohmann::ordered_json MomentumCellComplex::to_json() const {
  nlohmann::ordered_json j;
  j["dimension"] = dimension();
  nlohmann::ordered_json jf = nlohmann::ordered_json::array();
  for (const FactorPortrait& f : factors_) {
    nlohmann::ordered_json e;
    e["axis"] = f.index;
    e["mass"] = f.mass;
    e["critical_values"] = f.critical_values;
    e["degenerate"] = f.degenerate;
    if (f.single_trig) {
      e["wave_number"] = f.wave_number;
      e["amplitude"] = f.amplitude;
    }
    jf.push_back(std::move(e));
  }
  j["factors"] = std::move(jf);
  nlohmann::ordered_json jc = nlohmann::ordered_json::array();
  for (const MomentumCell& c : cells_) {
    nlohmann::ordered_json e;
    e["pieces"] = c.piece;
    e["dim"] = c.dim;
    e["in_image"] = c.in_image;
    nlohmann::ordered_json layer = nlohmann::ordered_json::array();
    for (const StratumSignature& s : c.layer) {
      layer.push_back({{"torus_rank", s.torus_rank},
                       {"line_rank", s.line_rank},
                       {"count", s.count}});
    }
    e["layer"] = std::move(layer);
    jc.push_back(std::move(e));
  }
  j["cells"] = std::move(jc);
  return j;
}

std::vector<std::vector<std::string>> MomentumCellComplex::stratum_table()
    const {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t ci = 0; ci < cells_.size(); ++ci) {
    const MomentumCell& c = cells_[ci];
    std::string pieces;
    for (std::size_t i = 0; i < c.piece.size(); ++i)
      pieces += (i ? ";" : "") + std::to_string(c.piece[i]);
    if (c.layer.empty()) {
      rows.push_back({std::to_string(ci), pieces, std::to_string(c.dim),
                      c.in_image ? "1" : "0", "", "", ""});
      continue;
    }
    for (const StratumSignature& s : c.layer)
      rows.push_back({std::to_string(ci), pieces, std::to_string(c.dim),
                      c.in_image ? "1" : "0", std::to_string(s.torus_rank),
                      std::to_string(s.line_rank), std::to_string(s.count)});
  }
  return rows;
}

MomentumCellComplex build_cell_complex(const TorusModel& model,
                                       const TrigPotential& potential) {
  return MomentumCellComplex(factor_portraits(model, potential));
}

std::string NondegeneracyReport::summary() const {
  std::ostringstream os;
  os << (pass ? "PASS" : "FAIL") << ": " << cell_count << " cells, "
     << strata.size() << " stratum checks";
  if (!degenerate_factors.empty()) {
    os << "; degenerate factors:";
    for (int i : degenerate_factors) os << " " << (i + 1);
  }
  for (const std::string& n : notes) os << "; " << n;
  return os.str();
}

namespace {

// Places a phase point on a chosen component of a factor level.
void place_factor_sample(const FactorPortrait& f, ComponentKind kind, double c,
                         double& x, double& y) {
  switch (kind) {
    case ComponentKind::Point: {
      for (const CriticalPoint& p : f.critical_points)
        if (std::abs(p.value - c) <= 1e-7) {
          x = p.x;
          y = 0.0;
          return;
        }
      throw SampleFailure("no critical point at the requested level");
    }
    case ComponentKind::Circle:
    case ComponentKind::Line: {
      x = f.argmin;
      double gap = f.degenerate ? c - f.offset : c - f.value_at(f.argmin);
      if (gap < 0) throw SampleFailure("level below the factor minimum");
      y = std::sqrt(2.0 * f.mass * gap);
      return;
    }
  }
  throw SampleFailure("unreachable component kind");
}

}  // namespace

NondegeneracyReport verify_nondegeneracy(const TorusModel& model,
                                         const TrigPotential& potential,
                                         int samples_per_cell) {
  if (samples_per_cell < 1)
    throw std::invalid_argument("need at least one sample per cell");
  NondegeneracyReport report;
  auto integrals = separable_integrals(model, potential);
  MomentumCellComplex complex = build_cell_complex(model, potential);
  const int n = complex.dimension();
  report.cell_count =
      static_cast<long>(complex.cells().size());  // clause (i): finite

  for (int i = 0; i < n; ++i)
    if (complex.factors()[i].degenerate) {
      report.degenerate_factors.push_back(i);
      report.pass = false;
      report.notes.push_back(
          "factor " + std::to_string(i + 1) +
          " has no critical structure; momentum map not proper over it");
    }

  for (std::size_t ci = 0; ci < complex.cells().size(); ++ci) {
    const MomentumCell& cell = complex.cells()[ci];
    if (!cell.in_image) continue;

    // clause (iii): the census must not change across the cell
    std::vector<std::vector<LayerComponent>> censuses;
    for (int s = 0; s < samples_per_cell; ++s) {
      double t = (s + 1.0) / (samples_per_cell + 1.0);
      std::vector<std::vector<LayerComponent>> per_factor;
      for (int i = 0; i < n; ++i) {
        const CellPiece& piece = complex.pieces(i)[cell.piece[i]];
        per_factor.push_back(
            classify_factor_level(complex.factors()[i], piece.sample(t)));
      }
      if (s == 0) {
        censuses = per_factor;
      } else if (censuses != per_factor) {
        report.pass = false;
        report.notes.push_back("layer census varies inside cell " +
                               std::to_string(ci));
      }
    }

    // clause (ii): rank at a constructed point of every stratum kind combo
    std::vector<std::size_t> kind_idx(n, 0);
    bool carry = false;
    while (!carry) {
      int expected = 0;
      Eigen::VectorXd x(n), y(n);
      bool placed = true;
      for (int i = 0; i < n; ++i) {
        const CellPiece& piece = complex.pieces(i)[cell.piece[i]];
        const auto census = classify_factor_level(complex.factors()[i],
                                                  piece.representative());
        if (census.empty()) {
          placed = false;
          break;
        }
        const LayerComponent& comp = census[kind_idx[i]];
        if (comp.kind != ComponentKind::Point) ++expected;
        place_factor_sample(complex.factors()[i], comp.kind,
                            piece.representative(), x[i], y[i]);
      }
      if (placed) {
        NondegeneracyReport::StratumCheck check;
        check.cell = ci;
        check.expected_dim = expected;
        int rank = rank_dF(integrals, PhasePoint(x, y));
        check.observed_ranks.push_back(rank);
        check.ok = rank == expected;
        // a degenerate factor legitimately breaks clause (ii); already noted
        if (!check.ok && report.degenerate_factors.empty()) report.pass = false;
        report.strata.push_back(std::move(check));
      }
      // advance the per-factor component-kind odometer
      int i = n - 1;
      for (; i >= 0; --i) {
        const CellPiece& piece = complex.pieces(i)[cell.piece[i]];
        const auto census = classify_factor_level(complex.factors()[i],
                                                  piece.representative());
        if (++kind_idx[i] < census.size()) break;
        kind_idx[i] = 0;
      }
      if (i < 0) carry = true;
    }
  }
  return report;
}

TorusTriviality torus_triviality(const MomentumCellComplex& complex,
                                 std::size_t cell_index) {
  if (cell_index >= complex.cells().size())
    throw std::invalid_argument("cell index out of range");
  const MomentumCell& cell = complex.cells()[cell_index];
  const int n = complex.dimension();
  if (cell.dim != n || !cell.in_image)
    throw std::invalid_argument("torus triviality needs a regular n-cell");
  TorusTriviality result;
  result.non_trivial = true;
  for (int i = 0; i < n; ++i) {
    const FactorPortrait& f = complex.factors()[i];
    const CellPiece& piece = complex.pieces(i)[cell.piece[i]];
    bool rotational = piece.unbounded_above ||
                      (!piece.is_point && piece.lo >= f.vmax - 1e-12);
    std::vector<int> cls(n, 0);
    if (rotational)
      cls[i] = 1;  // winds once around its coordinate
    else
      result.non_trivial = false;  // oscillation projects to a swept arc
    result.factor_classes.push_back(std::move(cls));
  }
  return result;
}

}  // namespace torusmech
