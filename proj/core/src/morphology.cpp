#include "dendrite/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dendrite {

double sample_bilinear(const ScalarField& f, double x, double y) {
  const GridSpec& g = f.grid();
  // fractional cell-centre coordinates
  const double u = std::clamp((x - g.x0) / g.hx() - 0.5, 0.0, g.nx - 1.0);
  const double v = std::clamp((y - g.y0) / g.hy() - 0.5, 0.0, g.ny - 1.0);
  const int i = std::min(static_cast<int>(u), g.nx - 2);
  const int j = std::min(static_cast<int>(v), g.ny - 2);
  const double a = u - i;
  const double b = v - j;
  return (1 - a) * (1 - b) * f(i, j) + a * (1 - b) * f(i + 1, j) + (1 - a) * b * f(i, j + 1) +
         a * b * f(i + 1, j + 1);
}

double ray_extent(const ScalarField& phi, double cx, double cy, double angle_rad) {
  const GridSpec& g = phi.grid();
  const double h = 0.25 * std::min(g.hx(), g.hy());
  const double c = std::cos(angle_rad), s = std::sin(angle_rad);
  double r = 0.0;
  for (;;) {
    const double x = cx + r * c, y = cy + r * s;
    if (x < g.x0 || x > g.x1 || y < g.y0 || y > g.y1) return r;
    if (sample_bilinear(phi, x, y) <= 0.0) return r;
    r += h;
  }
}

bool BranchAnalysis::axis_aligned(double tol_deg) const {
  for (const Arc& a : arcs) {
    const double off = std::fmod(a.centre_deg + 45.0, 90.0) - 45.0;
    if (std::abs(off) > tol_deg) return false;
  }
  return true;
}

bool BranchAnalysis::fourfold(double tol_deg) const {
  return branch_count() == 4 && axis_aligned(tol_deg) && diagonal_extent_max < axis_extent_min;
}

BranchAnalysis analyze_branches(const ScalarField& phi, double cx, double cy, double radius_fraction,
                                int samples) {
  if (samples < 8) throw std::invalid_argument("analyze_branches: need at least 8 samples");
  constexpr double pi = std::numbers::pi;
  BranchAnalysis out;
  out.axis_extent_min = ray_extent(phi, cx, cy, 0.0);
  for (int q = 1; q < 4; ++q) out.axis_extent_min = std::min(out.axis_extent_min, ray_extent(phi, cx, cy, q * pi / 2));
  for (int q = 0; q < 4; ++q) {
    out.diagonal_extent_max = std::max(out.diagonal_extent_max, ray_extent(phi, cx, cy, pi / 4 + q * pi / 2));
  }
  out.probe_radius = radius_fraction * out.axis_extent_min;
  if (out.probe_radius <= 0.0) return out;

  std::vector<char> solid(samples);
  for (int k = 0; k < samples; ++k) {
    const double a = 2 * pi * k / samples;
    solid[k] = sample_bilinear(phi, cx + out.probe_radius * std::cos(a), cy + out.probe_radius * std::sin(a)) > 0.0;
  }
  const auto first_gap = std::find(solid.begin(), solid.end(), 0);
  if (first_gap == solid.end()) {
    out.full_circle = true;
    return out;
  }
  // walk once around the circle starting in a gap so no arc wraps
  const int start = static_cast<int>(first_gap - solid.begin());
  const double step_deg = 360.0 / samples;
  int run = 0;
  int run_begin = 0;
  for (int m = 1; m <= samples; ++m) {
    const int k = (start + m) % samples;
    if (solid[k]) {
      if (run == 0) run_begin = start + m;
      ++run;
    } else if (run > 0) {
      Arc arc;
      arc.width_deg = run * step_deg;
      arc.centre_deg = std::fmod((run_begin + 0.5 * (run - 1)) * step_deg, 360.0);
      out.arcs.push_back(arc);
      run = 0;
    }
  }
  return out;
}

}  // namespace dendrite
