#include "torusmech/battery.hpp"

#include "torusmech/observables.hpp"
#include "torusmech/report.hpp"
#include "torusmech/strata.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace torusmech {

namespace {

// Critical values of U = sum_i a_i trig(k_i x_i): all sums of +-|a_i|.
std::vector<double> potential_critical_values(
    const std::vector<FactorPortrait>& factors) {
  std::vector<double> sums = {0.0};
  for (const FactorPortrait& f : factors) {
    double a = std::abs(f.amplitude);
    std::vector<double> next;
    next.reserve(2 * sums.size());
    for (double s : sums) {
      next.push_back(s - a);
      next.push_back(s + a);
    }
    sums = std::move(next);
  }
  std::sort(sums.begin(), sums.end());
  std::vector<double> dedup;
  for (double s : sums)
    if (dedup.empty() || s - dedup.back() > 1e-9) dedup.push_back(s);
  return dedup;
}

long int_pow(long b, int e) {
  long r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

std::string beta_string(const std::vector<long>& beta) {
  std::string s = "(";
  for (std::size_t i = 0; i < beta.size(); ++i)
    s += std::to_string(beta[i]) + (i + 1 < beta.size() ? "," : ")");
  return s;
}

}  // namespace

std::string BatteryResult::table() const {
  std::ostringstream os;
  for (const BatteryCheck& c : checks) {
    os << (c.informational ? "NOTE" : (c.pass ? "PASS" : "FAIL")) << "  "
       << c.name;
    if (!c.detail.empty()) os << "  [" << c.detail << "]";
    os << "\n";
  }
  os << "RESULT: " << (pass ? "PASS" : "FAIL") << "\n";
  return os.str();
}

BatteryResult verify_example3(const BatteryOptions& options) {
  if (options.dimension != 2 && options.dimension != 3)
    throw std::invalid_argument("battery supports dimensions 2 and 3");
  if (options.k_list.empty())
    throw std::invalid_argument("battery needs at least one wave number");
  for (int k : options.k_list)
    if (k < 1) throw std::invalid_argument("wave numbers must be >= 1");
  if (options.resolution < 8)
    throw std::invalid_argument("battery resolution must be >= 8");

  const int n = options.dimension;
  BatteryResult result;
  result.pass = true;
  auto add_check = [&](const std::string& name, bool pass,
                       const std::string& detail, bool informational = false) {
    result.checks.push_back({name, pass, informational, detail});
    if (!pass && !informational) result.pass = false;
  };

  nlohmann::ordered_json report;
  report["config"] = {{"dimension", n},
                      {"k_list", options.k_list},
                      {"resolution", options.resolution},
                      {"field", options.field_char}};
  nlohmann::ordered_json systems = nlohmann::ordered_json::array();
  nlohmann::ordered_json timings = nlohmann::ordered_json::array();

  std::vector<long> beta1_mid;
  for (int k : options.k_list) {
    const std::string tag = "n=" + std::to_string(n) + " k=" + std::to_string(k);
    SystemSpec spec = example3_system(n, std::vector<int>(n, k));
    nlohmann::ordered_json sys;
    sys["k"] = k;

    // exact integrability certificate
    auto integrals = separable_integrals(spec.model, spec.potential);
    Observable h = hamiltonian_observable(spec.model, spec.potential);
    InvolutionReport involution = involution_report(integrals, &h);
    Observable sum(n);
    for (const Observable& f : integrals) sum = sum + f;
    bool sum_ok = sum == h;
    add_check(tag + " involution", involution.pass && sum_ok,
              involution.summary() +
                  (sum_ok ? "; sum F_i = H exactly" : "; sum F_i != H"));
    sys["involution"] = involution.pass && sum_ok;

    // non-degeneracy of the momentum map
    NondegeneracyReport nondeg =
        verify_nondegeneracy(spec.model, spec.potential, 5);
    add_check(tag + " non-degeneracy", nondeg.pass, nondeg.summary());
    sys["nondegeneracy"] = nondeg.pass;

    // Morse windows from the factor critical values
    auto factors = factor_portraits(spec.model, spec.potential);
    std::vector<double> critical = potential_critical_values(factors);
    sys["critical_values"] = critical;
    if (critical.size() < 3)
      throw std::invalid_argument("battery needs at least three critical sums");
    double bottom_energy = 0.5 * (critical[0] + critical[1]);
    double mid_energy = 0.5 * (critical[1] + critical[2]);
    sys["bottom_window"] = {critical[0], critical[1]};
    sys["tube_window"] = {critical[1], critical[2]};
    // fixed thresholds n-2 and n-3 of the tube construction, for comparison
    sys["construction_thresholds"] = {n - 2.0, n - 3.0};

    if (options.energy_override) {
      double e = *options.energy_override;
      auto rows = betti_scan(spec.potential, {e},
                             std::vector<int>(n, options.resolution),
                             options.field_char, options.budget,
                             options.threads);
      bool empty = true;
      for (long b : rows[0].betti.beta) empty = empty && b == 0;
      sys["override"] = {{"E", e}, {"beta", rows[0].betti.beta}};
      if (empty)
        add_check(tag + " override energy", true,
                  "E = " + format_double(e) +
                      ": empty domain (below the potential minimum)",
                  true);
      else
        add_check(tag + " override energy", true,
                  "E = " + format_double(e) + ": beta = " +
                      beta_string(rows[0].betti.beta),
                  true);
      systems.push_back(std::move(sys));
      continue;
    }

    auto rows = betti_scan(spec.potential, {bottom_energy, mid_energy},
                           std::vector<int>(n, options.resolution),
                           options.field_char, options.budget,
                           options.threads);
    const ScanRow& bottom = rows[0];
    const ScanRow& mid = rows[1];
    timings.push_back(bottom.wall_ms);
    timings.push_back(mid.wall_ms);

    long wells = int_pow(k, n);
    bool bottom_ok = bottom.betti.beta[0] == wells && bottom.betti.beta[1] == 0;
    add_check(tag + " bottom window", bottom_ok,
              "E = " + format_double(bottom_energy) + ": beta = " +
                  beta_string(bottom.betti.beta) + ", expect beta_0 = " +
                  std::to_string(wells) + ", beta_1 = 0");

    // independent component count for the bottom window
    auto raster = rasterize_sublevel(spec.potential, EnergyLevel(bottom_energy),
                                     std::vector<int>(n, options.resolution),
                                     options.budget);
    long components = raster.complex.component_count();
    add_check(tag + " bottom union-find", components == wells,
              "union-find components = " + std::to_string(components));

    long expected_beta1 = (n - 1) * wells + 1;
    bool mid_ok =
        mid.betti.beta[0] == 1 && mid.betti.beta[1] == expected_beta1;
    add_check(tag + " tube window", mid_ok,
              "E = " + format_double(mid_energy) + ": beta = " +
                  beta_string(mid.betti.beta) + ", expect beta_1 = " +
                  std::to_string(expected_beta1));

    beta1_mid.push_back(mid.betti.beta[1]);
    sys["bottom"] = {{"E", bottom_energy},
                     {"beta", bottom.betti.beta},
                     {"cells", bottom.cell_counts},
                     {"union_find_components", components}};
    sys["tube"] = {{"E", mid_energy},
                   {"beta", mid.betti.beta},
                   {"cells", mid.cell_counts}};
    systems.push_back(std::move(sys));
  }

  if (!options.energy_override && options.k_list.size() > 1) {
    bool strict = true;
    for (std::size_t i = 1; i < beta1_mid.size(); ++i)
      strict = strict && beta1_mid[i] > beta1_mid[i - 1];
    std::string seq;
    for (std::size_t i = 0; i < beta1_mid.size(); ++i)
      seq += (i ? ", " : "") + std::to_string(beta1_mid[i]);
    add_check("beta_1 strict growth along k", strict, "beta_1 = " + seq);
    report["beta1_growth"] = beta1_mid;
  }

  report["systems"] = std::move(systems);
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const BatteryCheck& c : result.checks)
    checks.push_back({{"name", c.name},
                      {"pass", c.pass},
                      {"informational", c.informational},
                      {"detail", c.detail}});
  report["checks"] = std::move(checks);
  report["pass"] = result.pass;
  report["timings"] = {{"wall_ms", std::move(timings)}};
  result.report = std::move(report);
  return result;
}

}  // namespace torusmech
