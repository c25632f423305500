#include "torusmech/geodesics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

namespace torusmech {

HomotopyClass::HomotopyClass(std::vector<int> entries) : m(std::move(entries)) {
  if (m.empty()) throw std::invalid_argument("homotopy class needs entries");
}

bool HomotopyClass::is_zero() const {
  return std::all_of(m.begin(), m.end(), [](int e) { return e == 0; });
}

bool HomotopyClass::primitive() const {
  int g = 0;
  for (int e : m) g = std::gcd(g, std::abs(e));
  return g == 1;
}

HomotopyClass HomotopyClass::multiplied(int k) const {
  std::vector<int> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = k * m[i];
  return HomotopyClass(std::move(out));
}

double flat_minimal_length(const TorusModel& model, const HomotopyClass& alpha) {
  if (alpha.dimension() != model.dimension())
    throw std::invalid_argument("homotopy class dimension mismatch");
  if (alpha.is_zero())
    throw std::invalid_argument("the zero class has no minimal geodesic");
  Eigen::VectorXd m(alpha.dimension());
  for (int i = 0; i < alpha.dimension(); ++i) m[i] = alpha.m[i];
  return kTwoPi * std::sqrt(m.dot(model.metric() * m));
}

namespace {

struct LoopTerms {
  double length = 0.0;
  bool valid = true;  // E - U positive on all midpoints
  std::vector<double> segment_lengths;
};

Eigen::VectorXd closing_shift(const HomotopyClass& alpha) {
  Eigen::VectorXd s(alpha.dimension());
  for (int i = 0; i < alpha.dimension(); ++i) s[i] = kTwoPi * alpha.m[i];
  return s;
}

LoopTerms loop_terms(const TorusModel& model, const TrigPotential& potential,
                     double energy, const Eigen::MatrixXd& loop,
                     const Eigen::VectorXd& shift) {
  const long count = loop.rows();
  const int n = static_cast<int>(loop.cols());
  LoopTerms terms;
  if (!loop.allFinite()) {
    terms.valid = false;
    return terms;
  }
  terms.segment_lengths.resize(count);
  Eigen::VectorXd d(n), mid(n), gd(n);
  for (long j = 0; j < count; ++j) {
    for (int i = 0; i < n; ++i) {
      double next = j + 1 < count ? loop(j + 1, i) : loop(0, i) + shift[i];
      d[i] = next - loop(j, i);
      mid[i] = 0.5 * (loop(j, i) + next);
    }
    gd.noalias() = model.metric() * d;
    double len = std::sqrt(d.dot(gd));
    // collapsed segments would make the tangent (and gradient) undefined
    if (!(len > 1e-12)) {
      terms.valid = false;
      return terms;
    }
    double gap = energy - potential.value_and_gradient(mid, nullptr);
    if (gap <= 0.0) {
      terms.valid = false;
      return terms;
    }
    terms.segment_lengths[j] = len;
    terms.length += std::sqrt(gap) * len;
  }
  return terms;
}

// Objective with the tangential spacing regularizer; the reported length
// never includes it.
double objective(const TorusModel& model, const TrigPotential& potential,
                 double energy, const Eigen::MatrixXd& loop,
                 const Eigen::VectorXd& shift, double reg_weight,
                 bool* valid = nullptr) {
  LoopTerms terms = loop_terms(model, potential, energy, loop, shift);
  if (valid != nullptr) *valid = terms.valid;
  if (!terms.valid) return std::numeric_limits<double>::infinity();
  if (reg_weight == 0.0) return terms.length;
  const long count = loop.rows();
  double mean = 0.0;
  for (double len : terms.segment_lengths) mean += len;
  mean /= static_cast<double>(count);
  double reg = 0.0;
  for (double len : terms.segment_lengths) reg += (len - mean) * (len - mean);
  return terms.length + reg_weight * reg;
}

Eigen::MatrixXd objective_gradient(const TorusModel& model,
                                   const TrigPotential& potential,
                                   double energy, const Eigen::MatrixXd& loop,
                                   const Eigen::VectorXd& shift,
                                   double reg_weight) {
  const long count = loop.rows();
  const int n = static_cast<int>(loop.cols());
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(count, n);

  std::vector<double> seg_len(count);
  double mean = 0.0;
  if (reg_weight != 0.0) {
    LoopTerms terms = loop_terms(model, potential, energy, loop, shift);
    seg_len = terms.segment_lengths;
    for (double len : seg_len) mean += len;
    mean /= static_cast<double>(count);
  }

  Eigen::VectorXd d(n), mid(n), gd(n), du(n);
  for (long j = 0; j < count; ++j) {
    long next_row = (j + 1 < count) ? j + 1 : 0;
    for (int i = 0; i < n; ++i) {
      double next = j + 1 < count ? loop(j + 1, i) : loop(0, i) + shift[i];
      d[i] = next - loop(j, i);
      mid[i] = 0.5 * (loop(j, i) + next);
    }
    double w = std::sqrt(energy - potential.value_and_gradient(mid, &du));
    gd.noalias() = model.metric() * d;
    double len = std::sqrt(d.dot(gd));
    double reg_factor =
        reg_weight != 0.0 ? 2.0 * reg_weight * (seg_len[j] - mean) : 0.0;
    double tangent_scale = (w + reg_factor) / len;
    // d w / d mid = -grad U(mid) / (2 w); both endpoints get half of it
    double mid_scale = -0.5 * len / (2.0 * w);
    for (int i = 0; i < n; ++i) {
      double mid_part = mid_scale * du[i];
      double tan_part = tangent_scale * gd[i];
      grad(j, i) += mid_part - tan_part;
      grad(next_row, i) += mid_part + tan_part;
    }
  }
  return grad;
}

struct RestartOutcome {
  Eigen::MatrixXd loop;
  double length = std::numeric_limits<double>::infinity();
  bool converged = false;
  long iterations = 0;
};

RestartOutcome run_restart(const TorusModel& model,
                           const TrigPotential& potential, double energy,
                           const HomotopyClass& alpha,
                           const GeodesicOptions& options, int restart) {
  const int count = options.discretization;
  const int n = model.dimension();
  const Eigen::VectorXd shift = closing_shift(alpha);

  Eigen::MatrixXd loop(count, n);
  for (int j = 0; j < count; ++j)
    loop.row(j) = (static_cast<double>(j) / count) * shift.transpose();

  if (restart > 0) {
    // deterministic low-frequency perturbations, one stream per restart
    std::mt19937_64 rng(options.seed + static_cast<std::uint64_t>(restart));
    std::uniform_real_distribution<double> amp(-0.35, 0.35);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    std::uniform_real_distribution<double> base(0.0, kTwoPi);
    for (int i = 0; i < n; ++i) {
      double offset = base(rng);
      for (int j = 0; j < count; ++j) loop(j, i) += offset;
      for (int h = 1; h <= 3; ++h) {
        double a = amp(rng) / h;
        double p = phase(rng);
        for (int j = 0; j < count; ++j)
          loop(j, i) += a * std::sin(kTwoPi * h * j / count + p);
      }
    }
  }

  RestartOutcome outcome;
  bool valid = true;
  double reg = options.regularizer_weight;
  double f = objective(model, potential, energy, loop, shift, reg, &valid);
  if (!valid) return outcome;  // perturbation left the admissible region

  double step = 0.25;
  const long polish_after = options.max_iterations * 4 / 5;
  long it = 0;
  for (; it < options.max_iterations; ++it) {
    if (it == polish_after && reg != 0.0) {
      reg = 0.0;  // final polish on the pure length functional
      f = objective(model, potential, energy, loop, shift, reg);
    }
    Eigen::MatrixXd grad =
        objective_gradient(model, potential, energy, loop, shift, reg);
    double gmax = grad.cwiseAbs().maxCoeff();
    double pure = reg == 0.0
                      ? f
                      : loop_terms(model, potential, energy, loop, shift).length;
    if (gmax < options.convergence_factor * (pure / count)) {
      if (reg != 0.0) {
        reg = 0.0;  // converged with the regularizer on; polish next
        f = objective(model, potential, energy, loop, shift, reg);
        continue;
      }
      outcome.converged = true;
      break;
    }
    double g2 = grad.squaredNorm();
    bool accepted = false;
    for (int ls = 0; ls < 48; ++ls) {
      Eigen::MatrixXd cand = loop - step * grad;
      double fc = objective(model, potential, energy, cand, shift, reg);
      if (fc <= f - 1e-4 * step * g2) {
        loop = std::move(cand);
        f = fc;
        accepted = true;
        step *= 1.4;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (reg != 0.0) {
        reg = 0.0;
        f = objective(model, potential, energy, loop, shift, reg);
        step = 0.25;
        continue;
      }
      break;  // line search stalled at resolution limits
    }
  }
  outcome.iterations = it;
  outcome.loop = std::move(loop);
  outcome.length =
      loop_terms(model, potential, energy, outcome.loop, shift).length;
  return outcome;
}

}  // namespace

double jacobi_loop_length(const TorusModel& model,
                          const TrigPotential& potential, double energy,
                          const Eigen::MatrixXd& loop,
                          const HomotopyClass& alpha) {
  LoopTerms terms =
      loop_terms(model, potential, energy, loop, closing_shift(alpha));
  if (!terms.valid)
    throw DegenerateEnergy("loop leaves the region E > U");
  return terms.length;
}

Eigen::MatrixXd jacobi_loop_gradient(const TorusModel& model,
                                     const TrigPotential& potential,
                                     double energy, const Eigen::MatrixXd& loop,
                                     const HomotopyClass& alpha) {
  return objective_gradient(model, potential, energy, loop,
                            closing_shift(alpha), 0.0);
}

GeodesicSearchResult jacobi_minimal_geodesic(const TorusModel& model,
                                             const TrigPotential& potential,
                                             double energy,
                                             const HomotopyClass& alpha,
                                             const GeodesicOptions& options) {
  const int n = model.dimension();
  if (alpha.dimension() != n || potential.dimension() != n)
    throw std::invalid_argument("geodesic search dimension mismatch");
  if (alpha.is_zero())
    throw std::invalid_argument("geodesic search needs a nonzero class");
  if (options.discretization < 8)
    throw std::invalid_argument("need at least 8 discretization points");
  double umax = potential.max_value();
  if (energy <= umax + options.degenerate_margin)
    throw DegenerateEnergy(
        "Jacobi metric degenerate: E must exceed max U + margin (max U = " +
        std::to_string(umax) + ")");

  const int restarts = std::max(1, options.restarts);
  std::vector<RestartOutcome> outcomes(restarts);
  int workers = std::max(1, options.threads);
  if (workers == 1) {
    for (int r = 0; r < restarts; ++r)
      outcomes[r] = run_restart(model, potential, energy, alpha, options, r);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> cursor{0};
    for (int w = 0; w < std::min(workers, restarts); ++w)
      pool.emplace_back([&]() {
        for (int r = cursor.fetch_add(1); r < restarts;
             r = cursor.fetch_add(1))
          outcomes[r] = run_restart(model, potential, energy, alpha, options, r);
      });
    for (std::thread& t : pool) t.join();
  }

  // minimum length, ties broken by the lowest restart index
  int best = -1;
  for (int r = 0; r < restarts; ++r)
    if (best < 0 || outcomes[r].length < outcomes[best].length) best = r;
  if (!std::isfinite(outcomes[best].length))
    throw DegenerateEnergy("no admissible starting loop found");

  GeodesicSearchResult result;
  result.loop = std::move(outcomes[best].loop);
  result.lift_class = alpha.m;
  result.length = outcomes[best].length;
  result.converged = outcomes[best].converged;
  result.restarts_used = restarts;
  result.best_restart = best;
  result.seed = options.seed;
  result.iterations = outcomes[best].iterations;
  return result;
}

std::vector<DkRow> d_k_scan(const TorusModel& model,
                            const TrigPotential& potential, double energy,
                            const HomotopyClass& alpha, int k_max,
                            const GeodesicOptions& options) {
  if (!alpha.primitive())
    throw std::invalid_argument("d_k scan needs a primitive class");
  if (k_max < 1 || k_max > 8)
    throw std::invalid_argument("k_max must lie in 1..8");
  std::vector<DkRow> rows;
  for (int k = 1; k <= k_max; ++k) {
    GeodesicOptions scaled = options;
    scaled.discretization = options.discretization * k;
    GeodesicSearchResult res = jacobi_minimal_geodesic(
        model, potential, energy, alpha.multiplied(k), scaled);
    rows.push_back({k, res.length, res.length / k, res.converged});
  }
  return rows;
}

}  // namespace torusmech
