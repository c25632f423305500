#pragma once

#include "torusmech/dynamics.hpp"
#include "torusmech/geodesics.hpp"
#include "torusmech/homology.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace torusmech {

/// Deterministic shortest-faithful double formatting for data files.
std::string format_double(double v);

std::string csv_join(const std::vector<std::string>& cells);

/// Writes a whole file, throwing with the path in the message on failure.
void write_text_file(const std::string& path, const std::string& content);

/// FNV-1a hash of a canonical config dump; used for deterministic file names.
std::string config_hash(const nlohmann::ordered_json& config);

/// CSV of an energy scan: E, beta_0.., cells_0.., field, resolution, wall_ms.
std::string scan_csv(const std::vector<ScanRow>& rows,
                     const std::vector<int>& resolution, int field_char);

nlohmann::ordered_json scan_json(const std::vector<ScanRow>& rows,
                                 const std::vector<int>& resolution,
                                 int field_char);

/// CSV of a trajectory: t, x.., y.., H, F_1..F_m.
std::string trajectory_csv(const PhaseTrajectory& trajectory);

/// CSV of a geodesic loop: index, q_1..q_n (lifted points).
std::string loop_csv(const Eigen::MatrixXd& loop);

/// Step plot of beta_d against E.
std::string svg_step_plot(const std::vector<ScanRow>& rows);

/// Filled squares of a two-dimensional complex.
std::string svg_domain_raster(const PeriodicCubicalComplex& complex);

/// Loop drawn over a grayscale potential slice (two-dimensional systems).
std::string svg_geodesic_overlay(const TrigPotential& potential,
                                 const Eigen::MatrixXd& loop);

}  // namespace torusmech
