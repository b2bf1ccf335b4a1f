#include "epsens/contour.hpp"

#include "epsens/records.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace epsens {

namespace {

void check_grid(const GridData& g) {
  if (g.eps1.size() < 2 || g.eps0.size() < 2)
    throw std::invalid_argument("contour grid needs at least 2 distinct values per axis");
  if (g.value.rows() != static_cast<Eigen::Index>(g.eps1.size()) ||
      g.value.cols() != static_cast<Eigen::Index>(g.eps0.size()))
    throw std::invalid_argument("grid value matrix does not match axis lengths");
  for (std::size_t i = 1; i < g.eps1.size(); ++i)
    if (!(g.eps1[i] > g.eps1[i - 1]))
      throw std::invalid_argument("eps1 axis must be strictly increasing");
  for (std::size_t j = 1; j < g.eps0.size(); ++j)
    if (!(g.eps0[j] > g.eps0[j - 1]))
      throw std::invalid_argument("eps0 axis must be strictly increasing");
}

std::string fmt(double v, const char* spec = "%.17g") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string fmt_short(double v) { return format_shortest(v); }

using Pt = std::array<double, 2>;

struct Segment {
  Pt a, b;
};

bool close(const Pt& p, const Pt& q, double tol) {
  return std::abs(p[0] - q[0]) <= tol && std::abs(p[1] - q[1]) <= tol;
}

std::vector<ContourLine> chain(double level, std::vector<Segment> segs, double tol) {
  std::vector<ContourLine> lines;
  std::vector<char> used(segs.size(), 0);
  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (used[s]) continue;
    used[s] = 1;
    std::vector<Pt> pts = {segs[s].a, segs[s].b};
    bool grew = true;
    while (grew) {
      grew = false;
      for (std::size_t t = 0; t < segs.size(); ++t) {
        if (used[t]) continue;
        if (close(pts.back(), segs[t].a, tol)) {
          pts.push_back(segs[t].b);
        } else if (close(pts.back(), segs[t].b, tol)) {
          pts.push_back(segs[t].a);
        } else if (close(pts.front(), segs[t].a, tol)) {
          pts.insert(pts.begin(), segs[t].b);
        } else if (close(pts.front(), segs[t].b, tol)) {
          pts.insert(pts.begin(), segs[t].a);
        } else {
          continue;
        }
        used[t] = 1;
        grew = true;
      }
    }
    lines.push_back({level, std::move(pts)});
  }
  return lines;
}

}  // namespace

GridData refine_grid(const GridData& grid, int factor) {
  check_grid(grid);
  if (factor <= 1) return grid;
  auto subdivide = [factor](const std::vector<double>& axis) {
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < axis.size(); ++i)
      for (int s = 0; s < factor; ++s)
        out.push_back(axis[i] + (axis[i + 1] - axis[i]) * s / factor);
    out.push_back(axis.back());
    return out;
  };
  GridData out;
  out.eps1 = subdivide(grid.eps1);
  out.eps0 = subdivide(grid.eps0);
  out.value.resize(static_cast<Eigen::Index>(out.eps1.size()),
                   static_cast<Eigen::Index>(out.eps0.size()));
  for (std::size_t i = 0; i < out.eps1.size(); ++i) {
    const auto i0 = std::min((i / factor), grid.eps1.size() - 2);
    const double tx = (out.eps1[i] - grid.eps1[i0]) / (grid.eps1[i0 + 1] - grid.eps1[i0]);
    for (std::size_t j = 0; j < out.eps0.size(); ++j) {
      const auto j0 = std::min((j / factor), grid.eps0.size() - 2);
      const double ty = (out.eps0[j] - grid.eps0[j0]) / (grid.eps0[j0 + 1] - grid.eps0[j0]);
      const double v00 = grid.value(i0, j0), v10 = grid.value(i0 + 1, j0);
      const double v01 = grid.value(i0, j0 + 1), v11 = grid.value(i0 + 1, j0 + 1);
      out.value(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 + (1 - tx) * ty * v01 + tx * ty * v11;
    }
  }
  return out;
}

std::vector<double> nice_levels(double lo, double hi, int target) {
  if (!(hi > lo) || target < 1) return {};
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = 10.0 * mag;
  for (double m : {1.0, 2.0, 2.5, 5.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> out;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12 * step; v += step) {
    if (v > lo && v < hi) out.push_back(v);
  }
  return out;
}

std::vector<ContourLine> extract_contours(const GridData& grid,
                                          const std::vector<double>& levels) {
  check_grid(grid);
  const auto& e1 = grid.eps1;
  const auto& e0 = grid.eps0;
  const double tol = 1e-9 * (e1.back() - e1.front() + e0.back() - e0.front());

  std::vector<ContourLine> all;
  for (double level : levels) {
    std::vector<Segment> segs;
    for (std::size_t i = 0; i + 1 < e1.size(); ++i) {
      for (std::size_t j = 0; j + 1 < e0.size(); ++j) {
        const double a = grid.value(i, j);      // (e1[i],   e0[j])
        const double b = grid.value(i + 1, j);  // (e1[i+1], e0[j])
        const double c = grid.value(i + 1, j + 1);
        const double d = grid.value(i, j + 1);
        const int code = (a >= level) | ((b >= level) << 1) | ((c >= level) << 2) |
                         ((d >= level) << 3);
        if (code == 0 || code == 15) continue;

        auto cross = [level](double u, double v, double pu0, double pu1, double pv0,
                             double pv1) -> Pt {
          const double t = (level - u) / (v - u);
          return {pu0 + t * (pv0 - pu0), pu1 + t * (pv1 - pu1)};
        };
        const Pt pab = (a >= level) != (b >= level)
                           ? cross(a, b, e1[i], e0[j], e1[i + 1], e0[j])
                           : Pt{0, 0};
        const Pt pbc = (b >= level) != (c >= level)
                           ? cross(b, c, e1[i + 1], e0[j], e1[i + 1], e0[j + 1])
                           : Pt{0, 0};
        const Pt pcd = (c >= level) != (d >= level)
                           ? cross(c, d, e1[i + 1], e0[j + 1], e1[i], e0[j + 1])
                           : Pt{0, 0};
        const Pt pda = (d >= level) != (a >= level)
                           ? cross(d, a, e1[i], e0[j + 1], e1[i], e0[j])
                           : Pt{0, 0};

        switch (code) {
          case 1: case 14: segs.push_back({pda, pab}); break;   // A isolated
          case 2: case 13: segs.push_back({pab, pbc}); break;   // B isolated
          case 4: case 11: segs.push_back({pbc, pcd}); break;   // C isolated
          case 8: case 7:  segs.push_back({pcd, pda}); break;   // D isolated
          case 3: case 12: segs.push_back({pda, pbc}); break;   // AB vs CD split
          case 6: case 9:  segs.push_back({pab, pcd}); break;   // BC vs DA split
          case 5: case 10: {                                    // saddle
            const double center = 0.25 * (a + b + c + d);
            const bool high_diag_ac = (code == 5);
            if ((center >= level) == high_diag_ac) {
              segs.push_back({pab, pbc});
              segs.push_back({pcd, pda});
            } else {
              segs.push_back({pda, pab});
              segs.push_back({pbc, pcd});
            }
            break;
          }
          default: break;
        }
      }
    }
    auto lines = chain(level, std::move(segs), tol);
    all.insert(all.end(), lines.begin(), lines.end());
  }
  return all;
}

std::string render_contour_svg(const GridData& grid, const std::vector<ContourLine>& lines,
                               const std::vector<OverlayPoint>& overlay,
                               const std::string& title) {
  check_grid(grid);
  const double width = 760, height = 620;
  const double ml = 80, mr = 30, mt = 50, mb = 60;
  const double x0 = grid.eps1.front(), x1 = grid.eps1.back();
  const double y0 = grid.eps0.front(), y1 = grid.eps0.back();
  auto sx = [&](double v) { return ml + (v - x0) / (x1 - x0) * (width - ml - mr); };
  auto sy = [&](double v) { return height - mb - (v - y0) / (y1 - y0) * (height - mt - mb); };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width, "%g") +
         "\" height=\"" + fmt(height, "%g") + "\" viewBox=\"0 0 " + fmt(width, "%g") + " " +
         fmt(height, "%g") + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt(width / 2, "%g") +
         "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
         title + "</text>\n";
  svg += "<rect x=\"" + fmt(ml, "%g") + "\" y=\"" + fmt(mt, "%g") + "\" width=\"" +
         fmt(width - ml - mr, "%g") + "\" height=\"" + fmt(height - mt - mb, "%g") +
         "\" fill=\"none\" stroke=\"black\"/>\n";

  // axis ticks
  for (int t = 0; t <= 4; ++t) {
    const double vx = x0 + (x1 - x0) * t / 4.0;
    const double vy = y0 + (y1 - y0) * t / 4.0;
    svg += "<line x1=\"" + fmt(sx(vx), "%.2f") + "\" y1=\"" + fmt(height - mb, "%.2f") +
           "\" x2=\"" + fmt(sx(vx), "%.2f") + "\" y2=\"" + fmt(height - mb + 6, "%.2f") +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt(sx(vx), "%.2f") + "\" y=\"" + fmt(height - mb + 22, "%.2f") +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
           fmt(vx, "%.3g") + "</text>\n";
    svg += "<line x1=\"" + fmt(ml - 6, "%.2f") + "\" y1=\"" + fmt(sy(vy), "%.2f") + "\" x2=\"" +
           fmt(ml, "%.2f") + "\" y2=\"" + fmt(sy(vy), "%.2f") + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt(ml - 10, "%.2f") + "\" y=\"" + fmt(sy(vy) + 4, "%.2f") +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" +
           fmt(vy, "%.3g") + "</text>\n";
  }
  svg += "<text x=\"" + fmt(ml + (width - ml - mr) / 2, "%.2f") + "\" y=\"" +
         fmt(height - 16, "%.2f") +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">eps1</text>\n";
  svg += "<text x=\"22\" y=\"" + fmt(mt + (height - mt - mb) / 2, "%.2f") +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" transform=\"rotate(-90 "
         "22 " + fmt(mt + (height - mt - mb) / 2, "%.2f") + ")\">eps0</text>\n";

  // level sets, one color per distinct level
  std::vector<double> seen;
  for (const auto& line : lines) {
    if (line.points.size() < 2) continue;
    std::size_t color_idx = 0;
    bool found = false;
    for (std::size_t s = 0; s < seen.size(); ++s) {
      if (seen[s] == line.level) {
        color_idx = s;
        found = true;
        break;
      }
    }
    if (!found) {
      color_idx = seen.size();
      seen.push_back(line.level);
    }
    const char* color = palette[color_idx % 8];
    svg += "<polyline fill=\"none\" stroke=\"";
    svg += color;
    svg += "\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : line.points)
      svg += fmt(sx(p[0]), "%.2f") + "," + fmt(sy(p[1]), "%.2f") + " ";
    svg += "\"/>\n";
    const auto& mid = line.points[line.points.size() / 2];
    svg += "<text x=\"" + fmt(sx(mid[0]) + 3, "%.2f") + "\" y=\"" + fmt(sy(mid[1]) - 3, "%.2f") +
           "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"";
    svg += color;
    svg += "\">" + fmt(line.level, "%.4g") + "</text>\n";
  }

  for (const auto& pt : overlay) {
    svg += "<circle cx=\"" + fmt(sx(pt.eps1), "%.2f") + "\" cy=\"" + fmt(sy(pt.eps0), "%.2f") +
           "\" r=\"3.5\" fill=\"black\"/>\n";
    svg += "<text x=\"" + fmt(sx(pt.eps1) + 6, "%.2f") + "\" y=\"" + fmt(sy(pt.eps0) - 6, "%.2f") +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + pt.label + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void write_grid_csv(const GridData& grid, std::ostream& out) {
  check_grid(grid);
  out << "eps1,eps0,value\n";
  for (std::size_t i = 0; i < grid.eps1.size(); ++i)
    for (std::size_t j = 0; j < grid.eps0.size(); ++j)
      out << fmt_short(grid.eps1[i]) << "," << fmt_short(grid.eps0[j]) << ","
          << fmt(grid.value(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) << "\n";
}

}  // namespace epsens
