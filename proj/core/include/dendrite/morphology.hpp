#ifndef DENDRITE_MORPHOLOGY_HPP_
#define DENDRITE_MORPHOLOGY_HPP_

#include <vector>

#include "dendrite/grid.hpp"

namespace dendrite {

/// Bilinear interpolation of cell-centred values; points outside the cell
/// centres are clamped to the nearest boundary value.
double sample_bilinear(const ScalarField& f, double x, double y);

/// Distance from (cx, cy) along direction angle_rad to the first point where
/// phi <= 0, searched in steps of h/4 up to the domain boundary.
double ray_extent(const ScalarField& phi, double cx, double cy, double angle_rad);

/// Arc of the probe circle on which phi > 0.
struct Arc {
  double centre_deg = 0.0;  // in [0, 360)
  double width_deg = 0.0;
};

/// Branch structure of a crystal centred at (cx, cy).
///
/// The solid set {phi > 0} is sampled along a circle whose radius is a
/// fraction of the shortest axis-direction extent. Each connected arc of the
/// sampled set is one branch. A fourfold dendrite shows four arcs, each
/// centred near an axis direction, and reaches further along the axes than
/// along the diagonals.
struct BranchAnalysis {
  double probe_radius = 0.0;
  std::vector<Arc> arcs;
  double axis_extent_min = 0.0;      // shortest extent along +-x, +-y
  double diagonal_extent_max = 0.0;  // longest extent along the diagonals
  bool full_circle = false;          // the whole probe circle lies in the solid

  int branch_count() const { return static_cast<int>(arcs.size()); }
  /// Every arc centre lies within tol_deg of an axis direction.
  bool axis_aligned(double tol_deg = 20.0) const;
  /// Four axis-aligned branches, longer along the axes than the diagonals.
  bool fourfold(double tol_deg = 20.0) const;
};

BranchAnalysis analyze_branches(const ScalarField& phi, double cx, double cy, double radius_fraction = 0.75,
                                int samples = 2048);

}  // namespace dendrite

#endif  // DENDRITE_MORPHOLOGY_HPP_
