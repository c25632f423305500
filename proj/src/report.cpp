#include "torusmech/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace torusmech {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_join(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  line += '\n';
  return line;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write output file: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed for output file: " + path);
}

std::string config_hash(const nlohmann::ordered_json& config) {
  std::string dump = config.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(h ^ (h >> 32)));
  return buf;
}

namespace {

std::string resolution_tag(const std::vector<int>& resolution) {
  std::string tag;
  for (std::size_t i = 0; i < resolution.size(); ++i) {
    if (i) tag += 'x';
    tag += std::to_string(resolution[i]);
  }
  return tag;
}

}  // namespace

std::string scan_csv(const std::vector<ScanRow>& rows,
                     const std::vector<int>& resolution, int field_char) {
  const int n = static_cast<int>(resolution.size());
  std::vector<std::string> header = {"E"};
  for (int d = 0; d <= n; ++d) header.push_back("beta_" + std::to_string(d));
  for (int d = 0; d <= n; ++d) header.push_back("cells_" + std::to_string(d));
  header.push_back("field");
  header.push_back("resolution");
  header.push_back("wall_ms");
  std::string csv = csv_join(header);
  for (const ScanRow& row : rows) {
    std::vector<std::string> cells = {format_double(row.energy)};
    for (long b : row.betti.beta) cells.push_back(std::to_string(b));
    for (long c : row.cell_counts) cells.push_back(std::to_string(c));
    cells.push_back("GF(" + std::to_string(field_char) + ")");
    cells.push_back(resolution_tag(resolution));
    cells.push_back(std::to_string(row.wall_ms));
    csv += csv_join(cells);
  }
  return csv;
}

nlohmann::ordered_json scan_json(const std::vector<ScanRow>& rows,
                                 const std::vector<int>& resolution,
                                 int field_char) {
  nlohmann::ordered_json j;
  j["field"] = field_char;
  j["resolution"] = resolution;
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const ScanRow& row : rows) {
    nlohmann::ordered_json e;
    e["E"] = row.energy;
    e["beta"] = row.betti.beta;
    e["cells"] = row.cell_counts;
    e["degenerate_level"] = row.degenerate_level;
    arr.push_back(std::move(e));
  }
  j["rows"] = std::move(arr);
  nlohmann::ordered_json timings = nlohmann::ordered_json::array();
  for (const ScanRow& row : rows) timings.push_back(row.wall_ms);
  j["timings"] = {{"wall_ms", timings}};
  return j;
}

std::string trajectory_csv(const PhaseTrajectory& trajectory) {
  const int n = trajectory.dimension();
  std::vector<std::string> header = {"t"};
  for (int i = 1; i <= n; ++i) header.push_back("x" + std::to_string(i));
  for (int i = 1; i <= n; ++i) header.push_back("y" + std::to_string(i));
  header.push_back("H");
  for (int i = 1; i <= trajectory.integral_count(); ++i)
    header.push_back("F_" + std::to_string(i));
  std::string csv = csv_join(header);
  for (long s = 0; s < trajectory.size(); ++s) {
    PhasePoint p = trajectory.point(s);
    std::vector<std::string> cells = {format_double(trajectory.time(s))};
    for (int i = 0; i < n; ++i) cells.push_back(format_double(p.x[i]));
    for (int i = 0; i < n; ++i) cells.push_back(format_double(p.y[i]));
    cells.push_back(format_double(trajectory.energy(s)));
    for (int i = 0; i < trajectory.integral_count(); ++i)
      cells.push_back(format_double(trajectory.integral(i, s)));
    csv += csv_join(cells);
  }
  return csv;
}

std::string loop_csv(const Eigen::MatrixXd& loop) {
  const int n = static_cast<int>(loop.cols());
  std::vector<std::string> header = {"index"};
  for (int i = 1; i <= n; ++i) header.push_back("q" + std::to_string(i));
  std::string csv = csv_join(header);
  for (long j = 0; j < loop.rows(); ++j) {
    std::vector<std::string> cells = {std::to_string(j)};
    for (int i = 0; i < n; ++i) cells.push_back(format_double(loop(j, i)));
    csv += csv_join(cells);
  }
  return csv;
}

namespace {

std::string svg_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

const char* kPalette[4] = {"#4477aa", "#ee6677", "#228833", "#ccbb44"};

}  // namespace

std::string svg_step_plot(const std::vector<ScanRow>& rows) {
  if (rows.empty()) return "<svg xmlns=\"http://www.w3.org/2000/svg\"/>";
  const double width = 640, height = 400, margin = 48;
  double e_lo = rows.front().energy, e_hi = rows.back().energy;
  if (e_hi <= e_lo) e_hi = e_lo + 1.0;
  long b_max = 1;
  for (const ScanRow& row : rows)
    for (long b : row.betti.beta) b_max = std::max(b_max, b);
  auto x_of = [&](double e) {
    return margin + (e - e_lo) / (e_hi - e_lo) * (width - 2 * margin);
  };
  auto y_of = [&](double b) {
    return height - margin - b / static_cast<double>(b_max) * (height - 2 * margin);
  };
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\""
      << width - margin << "\" y2=\"" << height - margin
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin
      << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
  const std::size_t degrees = rows.front().betti.beta.size();
  for (std::size_t d = 0; d < degrees; ++d) {
    std::ostringstream path;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      double x = x_of(rows[r].energy);
      double y = y_of(static_cast<double>(rows[r].betti.beta[d]));
      if (r == 0)
        path << "M" << svg_coord(x) << " " << svg_coord(y);
      else
        path << " H" << svg_coord(x) << " V" << svg_coord(y);
    }
    svg << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\""
        << kPalette[d % 4] << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << width - margin + 4 << "\" y=\""
        << margin + 16 * static_cast<double>(d) << "\" fill=\""
        << kPalette[d % 4] << "\" font-size=\"12\">b" << d << "</text>\n";
  }
  for (const ScanRow& row : rows) {
    svg << "<text x=\"" << svg_coord(x_of(row.energy)) << "\" y=\""
        << height - margin + 16 << "\" font-size=\"10\" text-anchor=\"middle\">"
        << format_double(row.energy) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string svg_domain_raster(const PeriodicCubicalComplex& complex) {
  if (complex.dimension() != 2)
    throw std::invalid_argument("domain raster needs a 2-d complex");
  const int rx = complex.resolution()[0], ry = complex.resolution()[1];
  const double cell = 512.0 / std::max(rx, ry);
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
      << svg_coord(rx * cell) << "\" height=\"" << svg_coord(ry * cell)
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (long v = 0; v < complex.vertex_count(); ++v) {
    if (!complex.cell_included(2, 0, v)) continue;
    long gx = v % rx, gy = v / rx;
    svg << "<rect x=\"" << svg_coord(gx * cell) << "\" y=\""
        << svg_coord((ry - 1 - gy) * cell) << "\" width=\"" << svg_coord(cell)
        << "\" height=\"" << svg_coord(cell) << "\" fill=\"" << kPalette[0]
        << "\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string svg_geodesic_overlay(const TrigPotential& potential,
                                 const Eigen::MatrixXd& loop) {
  if (potential.dimension() != 2 || loop.cols() != 2)
    throw std::invalid_argument("geodesic overlay needs a 2-d system");
  const int grid = 64;
  const double size = 512.0, cell = size / grid;
  double lo = 1e300, hi = -1e300;
  Eigen::MatrixXd u(grid, grid);
  Eigen::VectorXd x(2);
  for (int gy = 0; gy < grid; ++gy)
    for (int gx = 0; gx < grid; ++gx) {
      x[0] = kTwoPi * gx / grid;
      x[1] = kTwoPi * gy / grid;
      u(gy, gx) = potential(x);
      lo = std::min(lo, u(gy, gx));
      hi = std::max(hi, u(gy, gx));
    }
  if (hi <= lo) hi = lo + 1.0;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size
      << "\" height=\"" << size << "\">\n";
  for (int gy = 0; gy < grid; ++gy)
    for (int gx = 0; gx < grid; ++gx) {
      int shade = 255 - static_cast<int>(195.0 * (u(gy, gx) - lo) / (hi - lo));
      svg << "<rect x=\"" << svg_coord(gx * cell) << "\" y=\""
          << svg_coord(size - (gy + 1) * cell) << "\" width=\""
          << svg_coord(cell) << "\" height=\"" << svg_coord(cell)
          << "\" fill=\"rgb(" << shade << "," << shade << "," << shade
          << ")\"/>\n";
    }
  // loop segments, split where the reduced track wraps around the torus
  auto px = [&](double angle) { return reduce_angle(angle) / kTwoPi * size; };
  const long count = loop.rows();
  for (long j = 0; j < count; ++j) {
    double ax = loop(j, 0), ay = loop(j, 1);
    double bx = j + 1 < count ? loop(j + 1, 0) : loop(0, 0);
    double by = j + 1 < count ? loop(j + 1, 1) : loop(0, 1);
    double x1 = px(ax), y1 = size - px(ay) * 1.0;
    double dxr = reduce_angle(bx) - reduce_angle(ax);
    double dyr = reduce_angle(by) - reduce_angle(ay);
    if (std::abs(dxr) > M_PI || std::abs(dyr) > M_PI) continue;  // wrap split
    double x2 = px(bx), y2 = size - px(by);
    svg << "<line x1=\"" << svg_coord(x1) << "\" y1=\"" << svg_coord(y1)
        << "\" x2=\"" << svg_coord(x2) << "\" y2=\"" << svg_coord(y2)
        << "\" stroke=\"" << kPalette[1] << "\" stroke-width=\"2.5\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace torusmech
