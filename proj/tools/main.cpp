#include "torusmech/battery.hpp"
#include "torusmech/dynamics.hpp"
#include "torusmech/geodesics.hpp"
#include "torusmech/homology.hpp"
#include "torusmech/observables.hpp"
#include "torusmech/report.hpp"
#include "torusmech/spec_io.hpp"
#include "torusmech/strata.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

namespace {

using namespace torusmech;
namespace fs = std::filesystem;

long cell_budget(long flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("TORUSMECH_CELL_BUDGET")) {
    long v = std::atol(env);
    if (v <= 0)
      throw std::invalid_argument("TORUSMECH_CELL_BUDGET must be positive");
    return v;
  }
  return kDefaultCellBudget;
}

std::string prepare_out_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec)
    throw std::runtime_error("cannot create output directory: " + out + " (" +
                             ec.message() + ")");
  return out;
}

std::string out_path(const std::string& dir, const std::string& stem,
                     const std::string& hash, const std::string& ext) {
  return dir + "/" + stem + "_" + hash + "." + ext;
}

std::vector<int> resolve_resolution(int n, std::vector<int> per_axis,
                                    int uniform) {
  if (!per_axis.empty()) {
    if (static_cast<int>(per_axis.size()) != n)
      throw std::invalid_argument("need one --resolution entry per axis");
    return per_axis;
  }
  return std::vector<int>(n, uniform);
}

struct BettiArgs {
  std::string spec;
  std::string out = "out";
  double energy = 0.0;
  int resolution = 64;
  std::vector<int> resolution_list;
  int field = 2;
  long budget = 0;
  bool svg = false;
};

int run_betti(const BettiArgs& a) {
  SystemSpec spec = load_system(a.spec);
  const int n = spec.model.dimension();
  std::vector<int> res = resolve_resolution(n, a.resolution_list, a.resolution);
  auto rows = betti_scan(spec.potential, {a.energy}, res, a.field,
                         cell_budget(a.budget));

  nlohmann::ordered_json config = {{"command", "betti"},
                                   {"spec", system_to_json(spec)},
                                   {"energy", a.energy},
                                   {"resolution", res},
                                   {"field", a.field}};
  std::string hash = config_hash(config);
  std::string dir = prepare_out_dir(a.out);
  write_text_file(out_path(dir, "betti", hash, "csv"),
                  scan_csv(rows, res, a.field));
  nlohmann::ordered_json j = scan_json(rows, res, a.field);
  j["config"] = config;
  write_text_file(out_path(dir, "betti", hash, "json"), j.dump(2) + "\n");
  if (a.svg && n == 2) {
    auto raster =
        rasterize_sublevel(spec.potential, EnergyLevel(a.energy), res,
                           cell_budget(a.budget));
    write_text_file(out_path(dir, "domain", hash, "svg"),
                    svg_domain_raster(raster.complex));
  }
  std::cout << "E = " << format_double(a.energy) << "  beta =";
  for (long b : rows[0].betti.beta) std::cout << " " << b;
  if (rows[0].degenerate_level)
    std::cout << "  (warning: E within 1e-12 of a grid value; consider "
                 "perturbing E by ~1e-6)";
  std::cout << "\n";
  return 0;
}

struct ScanArgs {
  std::string spec;
  std::string out = "out";
  std::vector<double> energies;
  int resolution = 64;
  std::vector<int> resolution_list;
  int field = 2;
  long budget = 0;
  int threads = 1;
  bool svg = false;
};

int run_scan(const ScanArgs& a) {
  SystemSpec spec = load_system(a.spec);
  const int n = spec.model.dimension();
  std::vector<int> res = resolve_resolution(n, a.resolution_list, a.resolution);
  std::vector<double> energies = a.energies;
  std::sort(energies.begin(), energies.end());
  auto rows = betti_scan(spec.potential, energies, res, a.field,
                         cell_budget(a.budget), a.threads);

  nlohmann::ordered_json config = {{"command", "scan"},
                                   {"spec", system_to_json(spec)},
                                   {"energies", energies},
                                   {"resolution", res},
                                   {"field", a.field}};
  std::string hash = config_hash(config);
  std::string dir = prepare_out_dir(a.out);
  write_text_file(out_path(dir, "scan", hash, "csv"),
                  scan_csv(rows, res, a.field));
  nlohmann::ordered_json j = scan_json(rows, res, a.field);
  j["config"] = config;
  write_text_file(out_path(dir, "scan", hash, "json"), j.dump(2) + "\n");
  if (a.svg)
    write_text_file(out_path(dir, "scan", hash, "svg"), svg_step_plot(rows));
  for (const ScanRow& row : rows) {
    std::cout << "E = " << format_double(row.energy) << "  beta =";
    for (long b : row.betti.beta) std::cout << " " << b;
    std::cout << "\n";
  }
  return 0;
}

struct StrataArgs {
  std::string spec;
  std::string out = "out";
  int samples = 5;
};

int run_strata(const StrataArgs& a) {
  SystemSpec spec = load_system(a.spec);
  MomentumCellComplex complex =
      build_cell_complex(spec.model, spec.potential);
  NondegeneracyReport report =
      verify_nondegeneracy(spec.model, spec.potential, a.samples);

  nlohmann::ordered_json config = {{"command", "strata"},
                                   {"spec", system_to_json(spec)},
                                   {"samples", a.samples}};
  std::string hash = config_hash(config);
  std::string dir = prepare_out_dir(a.out);

  nlohmann::ordered_json j = complex.to_json();
  j["nondegeneracy"] = {{"pass", report.pass},
                        {"cell_count", report.cell_count},
                        {"summary", report.summary()}};
  nlohmann::ordered_json ranks = nlohmann::ordered_json::array();
  for (const auto& check : report.strata)
    ranks.push_back({{"cell", check.cell},
                     {"expected_dim", check.expected_dim},
                     {"ranks", check.observed_ranks},
                     {"ok", check.ok}});
  j["stratum_ranks"] = std::move(ranks);
  j["config"] = config;
  write_text_file(out_path(dir, "strata", hash, "json"), j.dump(2) + "\n");

  std::string csv = csv_join(
      {"cell", "pieces", "dim", "in_image", "torus_rank", "line_rank", "count"});
  for (const auto& row : complex.stratum_table()) csv += csv_join(row);
  write_text_file(out_path(dir, "strata", hash, "csv"), csv);

  std::cout << report.summary() << "\n";
  for (int d = complex.dimension(); d >= 0; --d)
    std::cout << d << "-cells: " << complex.cell_count(d, false) << " ("
              << complex.cell_count(d, true) << " in image)\n";
  return 0;
}

struct SimulateArgs {
  std::string spec;
  std::string out = "out";
  std::string p0;  // "x1,..,xn;y1,..,yn"
  std::vector<double> x0, y0;
  double dt = 1e-3;
  long steps = 100000;
  long stride = 1;
};

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
  return values;
}

int run_simulate(SimulateArgs a) {
  SystemSpec spec = load_system(a.spec);
  const int n = spec.model.dimension();
  if (!a.p0.empty()) {
    auto split = a.p0.find(';');
    if (split == std::string::npos)
      throw std::invalid_argument("--p0 format is x1,..,xn;y1,..,yn");
    a.x0 = parse_number_list(a.p0.substr(0, split));
    a.y0 = parse_number_list(a.p0.substr(split + 1));
  }
  if (static_cast<int>(a.x0.size()) != n || static_cast<int>(a.y0.size()) != n)
    throw std::invalid_argument(
        "initial point needs one angle and one momentum per dimension");
  Eigen::VectorXd x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = a.x0[i];
    y[i] = a.y0[i];
  }
  PhasePoint p0(x, y);

  std::vector<Observable> integrals;
  bool separable = spec.model.metric_is_diagonal() && spec.potential.separable();
  if (separable) integrals = separable_integrals(spec.model, spec.potential);

  PhaseTrajectory traj =
      integrate(spec.model, spec.potential, p0, a.dt, a.steps,
                separable ? &integrals : nullptr, a.stride);
  double energy0 = traj.energy(0);
  double h_drift = 0.0;
  for (long s = 0; s < traj.size(); ++s)
    h_drift = std::max(h_drift, std::abs(traj.energy(s) - energy0));
  double f_drift = separable ? integral_drift(traj, integrals) : 0.0;
  ConfinementReport confinement =
      check_confinement(traj, spec.potential, EnergyLevel(energy0));

  nlohmann::ordered_json config = {
      {"command", "simulate"}, {"spec", system_to_json(spec)},
      {"x0", a.x0},            {"y0", a.y0},
      {"dt", a.dt},            {"steps", a.steps},
      {"stride", a.stride}};
  std::string hash = config_hash(config);
  std::string dir = prepare_out_dir(a.out);
  write_text_file(out_path(dir, "trajectory", hash, "csv"),
                  trajectory_csv(traj));
  nlohmann::ordered_json j = {
      {"config", config},
      {"method", traj.method()},
      {"energy", energy0},
      {"samples", traj.size()},
      {"max_energy_drift", h_drift},
      {"max_integral_drift", separable ? nlohmann::ordered_json(f_drift)
                                       : nlohmann::ordered_json()},
      {"confinement",
       {{"max_excursion", confinement.max_excursion},
        {"tolerance", confinement.tolerance},
        {"ok", confinement.ok}}}};
  write_text_file(out_path(dir, "summary", hash, "json"), j.dump(2) + "\n");

  std::cout << "steps = " << a.steps << "  dt = " << format_double(a.dt)
            << "  H = " << format_double(energy0)
            << "  max |H drift| = " << format_double(h_drift);
  if (separable)
    std::cout << "  max |F drift| = " << format_double(f_drift);
  std::cout << "  confinement " << (confinement.ok ? "ok" : "violated")
            << "\n";
  return 0;
}

struct GeodesicArgs {
  std::string spec;
  std::string out = "out";
  std::vector<int> loop_class;
  double energy = 2.5;
  int points = 256;
  int restarts = 8;
  std::uint64_t seed = 1789;
  int threads = 1;
  int dk_max = 0;
  bool svg = false;
};

int run_geodesic(const GeodesicArgs& a) {
  SystemSpec spec = load_system(a.spec);
  const int n = spec.model.dimension();
  if (static_cast<int>(a.loop_class.size()) != n)
    throw std::invalid_argument("--class needs one entry per dimension");
  HomotopyClass alpha(a.loop_class);

  GeodesicOptions options;
  options.discretization = a.points;
  options.restarts = a.restarts;
  options.seed = a.seed;
  options.threads = a.threads;

  nlohmann::ordered_json config = {{"command", "geodesic"},
                                   {"spec", system_to_json(spec)},
                                   {"class", a.loop_class},
                                   {"energy", a.energy},
                                   {"N", a.points},
                                   {"restarts", a.restarts},
                                   {"seed", a.seed},
                                   {"dk_max", a.dk_max}};
  std::string hash = config_hash(config);
  std::string dir = prepare_out_dir(a.out);

  if (a.dk_max > 0) {
    auto rows =
        d_k_scan(spec.model, spec.potential, a.energy, alpha, a.dk_max, options);
    std::string csv = csv_join({"k", "L", "d_k", "converged"});
    int argmin = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      csv += csv_join({std::to_string(rows[i].k), format_double(rows[i].length),
                       format_double(rows[i].dk),
                       rows[i].converged ? "1" : "0"});
      if (rows[i].dk < rows[argmin].dk) argmin = static_cast<int>(i);
    }
    write_text_file(out_path(dir, "dk_scan", hash, "csv"), csv);
    for (const DkRow& row : rows)
      std::cout << "k = " << row.k << "  L = " << format_double(row.length)
                << "  d_k = " << format_double(row.dk) << "\n";
    std::cout << "argmin k = " << rows[argmin].k << "\n";
    return 0;
  }

  GeodesicSearchResult res = jacobi_minimal_geodesic(
      spec.model, spec.potential, a.energy, alpha, options);
  write_text_file(out_path(dir, "loop", hash, "csv"), loop_csv(res.loop));
  nlohmann::ordered_json j = {{"config", config},
                              {"length", res.length},
                              {"converged", res.converged},
                              {"restarts_used", res.restarts_used},
                              {"best_restart", res.best_restart},
                              {"iterations", res.iterations},
                              {"seed", res.seed},
                              {"lift_class", res.lift_class}};
  write_text_file(out_path(dir, "geodesic", hash, "json"), j.dump(2) + "\n");
  if (a.svg && n == 2)
    write_text_file(out_path(dir, "geodesic", hash, "svg"),
                    svg_geodesic_overlay(spec.potential, res.loop));
  std::cout << "class (";
  for (int i = 0; i < n; ++i)
    std::cout << a.loop_class[i] << (i + 1 < n ? "," : ")");
  std::cout << "  E = " << format_double(a.energy)
            << "  length = " << format_double(res.length)
            << (res.converged ? "" : "  (not converged)") << "\n";
  return 0;
}

struct GlueArgs {
  std::string spec;
  std::string out = "out";
  std::vector<int> copies;
};

int run_glue(const GlueArgs& a) {
  SystemSpec spec = load_system(a.spec);
  GluingSpec gluing(a.copies);
  TrigPotential glued = glue(spec.potential, gluing);
  SystemSpec out_spec{spec.model, glued};

  nlohmann::ordered_json config = {{"command", "glue"},
                                   {"spec", system_to_json(spec)},
                                   {"copies", a.copies}};
  std::string hash = config_hash(config);
  std::string dir = prepare_out_dir(a.out);
  std::string path = out_path(dir, "glued", hash, "json");
  write_text_file(path, system_to_json(out_spec).dump(2) + "\n");
  std::cout << "glued system written to " << path << " ("
            << glued.terms().size() << " term(s))\n";
  return 0;
}

struct VerifyArgs {
  std::string out = "out";
  int dimension = 2;
  std::vector<int> k_list = {1, 2};
  int resolution = 64;
  int field = 2;
  double energy = std::numeric_limits<double>::quiet_NaN();
  long budget = 0;
  int threads = 1;
};

int run_verify(const VerifyArgs& a) {
  BatteryOptions options;
  options.dimension = a.dimension;
  options.k_list = a.k_list;
  options.resolution = a.resolution;
  options.field_char = a.field;
  options.budget = cell_budget(a.budget);
  options.threads = a.threads;
  if (!std::isnan(a.energy)) options.energy_override = a.energy;

  BatteryResult result = verify_example3(options);

  nlohmann::ordered_json config = {{"command", "verify-example3"},
                                   {"dimension", a.dimension},
                                   {"k_list", a.k_list},
                                   {"resolution", a.resolution},
                                   {"field", a.field}};
  std::string hash = config_hash(config);
  std::string dir = prepare_out_dir(a.out);
  write_text_file(out_path(dir, "verify_example3", hash, "json"),
                  result.report.dump(2) + "\n");
  std::string csv = csv_join({"check", "result", "informational", "detail"});
  for (const BatteryCheck& c : result.checks)
    csv += csv_join({c.name, c.pass ? "PASS" : "FAIL",
                     c.informational ? "1" : "0", "\"" + c.detail + "\""});
  write_text_file(out_path(dir, "verify_example3", hash, "csv"), csv);

  std::cout << result.table();
  return result.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"torusmech: integrability, topology and geodesics of natural "
               "systems on flat tori"};
  app.require_subcommand(1);

  BettiArgs betti_args;
  CLI::App* betti_cmd =
      app.add_subcommand("betti", "Betti numbers of one sublevel domain");
  betti_cmd->add_option("--spec", betti_args.spec, "system spec JSON")
      ->required();
  betti_cmd->add_option("--energy", betti_args.energy, "energy level E")
      ->required();
  betti_cmd->add_option("--resolution", betti_args.resolution,
                        "grid resolution per axis (default 64)");
  betti_cmd->add_option("--resolution-list", betti_args.resolution_list,
                        "per-axis resolutions")
      ->delimiter(',');
  betti_cmd->add_option("--field", betti_args.field,
                        "field characteristic (prime, default 2)");
  betti_cmd->add_option("--budget", betti_args.budget, "top-cell budget");
  betti_cmd->add_option("--out", betti_args.out, "output directory");
  betti_cmd->add_flag("--svg", betti_args.svg, "emit a 2-d domain raster");

  ScanArgs scan_args;
  CLI::App* scan_cmd =
      app.add_subcommand("scan", "Betti table over a list of energies");
  scan_cmd->add_option("--spec", scan_args.spec, "system spec JSON")
      ->required();
  scan_cmd->add_option("--energies", scan_args.energies, "energy levels")
      ->required()
      ->delimiter(',');
  scan_cmd->add_option("--resolution", scan_args.resolution,
                       "grid resolution per axis (default 64)");
  scan_cmd->add_option("--resolution-list", scan_args.resolution_list,
                       "per-axis resolutions")
      ->delimiter(',');
  scan_cmd->add_option("--field", scan_args.field,
                       "field characteristic (prime, default 2)");
  scan_cmd->add_option("--budget", scan_args.budget, "top-cell budget");
  scan_cmd->add_option("--threads", scan_args.threads,
                       "worker pool size for the scan (default 1)");
  scan_cmd->add_option("--out", scan_args.out, "output directory");
  scan_cmd->add_flag("--svg", scan_args.svg, "emit a step plot of beta(E)");

  StrataArgs strata_args;
  CLI::App* strata_cmd = app.add_subcommand(
      "strata", "momentum cell complex and non-degeneracy report");
  strata_cmd->add_option("--spec", strata_args.spec, "system spec JSON")
      ->required();
  strata_cmd->add_option("--samples", strata_args.samples,
                         "census samples per cell (default 5)");
  strata_cmd->add_option("--out", strata_args.out, "output directory");

  SimulateArgs sim_args;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "symplectic integration of one orbit");
  sim_cmd->add_option("--spec", sim_args.spec, "system spec JSON")->required();
  sim_cmd->add_option("--p0", sim_args.p0,
                      "initial phase point as x1,..,xn;y1,..,yn");
  sim_cmd->add_option("--x0", sim_args.x0, "initial angles")->delimiter(',');
  sim_cmd->add_option("--y0", sim_args.y0, "initial momenta")->delimiter(',');
  sim_cmd->add_option("--dt", sim_args.dt, "time step (default 1e-3)");
  sim_cmd->add_option("--steps", sim_args.steps, "step count (default 1e5)");
  sim_cmd->add_option("--stride", sim_args.stride,
                      "record every k-th step (default 1)");
  sim_cmd->add_option("--out", sim_args.out, "output directory");

  GeodesicArgs geo_args;
  CLI::App* geo_cmd = app.add_subcommand(
      "geodesic", "minimal closed Jacobi geodesic in a homotopy class");
  geo_cmd->add_option("--spec", geo_args.spec, "system spec JSON")->required();
  geo_cmd->add_option("--class", geo_args.loop_class, "homotopy class in Z^n")
      ->required()
      ->delimiter(',');
  geo_cmd->add_option("--energy", geo_args.energy, "energy E > max U")
      ->required();
  geo_cmd->add_option("--N", geo_args.points,
                      "discretization points (default 256)");
  geo_cmd->add_option("--restarts", geo_args.restarts,
                      "multi-start count (default 8)");
  geo_cmd->add_option("--seed", geo_args.seed, "perturbation seed");
  geo_cmd->add_option("--threads", geo_args.threads, "parallel restarts");
  geo_cmd->add_option("--dk", geo_args.dk_max,
                      "scan d_k = L_{k alpha}/k up to this k");
  geo_cmd->add_option("--out", geo_args.out, "output directory");
  geo_cmd->add_flag("--svg", geo_args.svg,
                    "emit the loop over a potential slice (2-d)");

  GlueArgs glue_args;
  CLI::App* glue_cmd = app.add_subcommand(
      "glue", "scale wave vectors by copies per axis and emit a new spec");
  glue_cmd->add_option("--spec", glue_args.spec, "system spec JSON")
      ->required();
  glue_cmd->add_option("--copies", glue_args.copies, "copies per axis")
      ->required()
      ->delimiter(',');
  glue_cmd->add_option("--out", glue_args.out, "output directory");

  VerifyArgs verify_args;
  CLI::App* verify_cmd = app.add_subcommand(
      "verify-example3", "bundled verification battery for the staple "
                         "sum-of-cosines systems");
  verify_cmd->add_option("-n,--dimension", verify_args.dimension,
                         "configuration dimension (2 or 3)");
  verify_cmd->add_option("-k,--k-list", verify_args.k_list,
                         "wave numbers to test (default 1,2)")
      ->delimiter(',');
  verify_cmd->add_option("-r,--resolution", verify_args.resolution,
                         "grid resolution per axis (default 64)");
  verify_cmd->add_option("--field", verify_args.field,
                         "field characteristic (prime, default 2)");
  verify_cmd->add_option("--energy", verify_args.energy,
                         "override energy (guarded, informational)");
  verify_cmd->add_option("--budget", verify_args.budget, "top-cell budget");
  verify_cmd->add_option("--threads", verify_args.threads,
                         "worker pool size (default 1)");
  verify_cmd->add_option("--out", verify_args.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (betti_cmd->parsed()) return run_betti(betti_args);
    if (scan_cmd->parsed()) return run_scan(scan_args);
    if (strata_cmd->parsed()) return run_strata(strata_args);
    if (sim_cmd->parsed()) return run_simulate(sim_args);
    if (geo_cmd->parsed()) return run_geodesic(geo_args);
    if (glue_cmd->parsed()) return run_glue(glue_args);
    if (verify_cmd->parsed()) return run_verify(verify_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
