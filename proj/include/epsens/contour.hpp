#pragma once

#include <Eigen/Core>
#include <array>
#include <ostream>
#include <string>
#include <vector>

namespace epsens {

// Rectilinear grid of estimates over (eps1, eps0): value(i, j) belongs to
// (eps1[i], eps0[j]). Axes must hold at least 2 distinct values each.
struct GridData {
  std::vector<double> eps1, eps0;
  Eigen::MatrixXd value;
};

struct ContourLine {
  double level = 0.0;
  std::vector<std::array<double, 2>> points;  // (eps1, eps0) polyline
};

struct OverlayPoint {
  double eps1 = 1.0, eps0 = 1.0;
  std::string label;
};

// Bilinear refinement: each cell is subdivided `factor` times. Level sets of
// the refined grid follow the bilinear interpolant more closely.
GridData refine_grid(const GridData& grid, int factor);

// Roughly `target` round levels spanning [lo, hi].
std::vector<double> nice_levels(double lo, double hi, int target);

// Marching squares with linear interpolation along cell edges; saddle cells
// are disambiguated by the cell-center average. Segments are chained into
// polylines.
std::vector<ContourLine> extract_contours(const GridData& grid, const std::vector<double>& levels);

// Self-contained SVG: axes, labeled level sets, optional calibration overlay
// points. Deterministic output for identical inputs.
std::string render_contour_svg(const GridData& grid, const std::vector<ContourLine>& lines,
                               const std::vector<OverlayPoint>& overlay, const std::string& title);

// Long format: eps1,eps0,value — one row per grid node.
void write_grid_csv(const GridData& grid, std::ostream& out);

}  // namespace epsens
