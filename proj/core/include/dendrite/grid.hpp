#ifndef DENDRITE_GRID_HPP_
#define DENDRITE_GRID_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace dendrite {

/// Uniform cell-centred grid on [x0,x1] x [y0,y1].
///
/// Cell (i, j) has its centre at (x0 + (i+1/2) hx, y0 + (j+1/2) hy). Field
/// storage is row-major over (i, j): the flat index is i * ny + j.
struct GridSpec {
  int nx = 0;
  int ny = 0;
  double x0 = 0.0;
  double x1 = 1.0;
  double y0 = 0.0;
  double y1 = 1.0;

  /// Validated constructor; throws ConfigError unless nx, ny >= 4 and the
  /// bounds are increasing.
  static GridSpec make(int nx, int ny, double x0, double x1, double y0, double y1);

  double hx() const { return (x1 - x0) / nx; }
  double hy() const { return (y1 - y0) / ny; }
  double cell_area() const { return hx() * hy(); }
  double area() const { return (x1 - x0) * (y1 - y0); }
  double x(int i) const { return x0 + (i + 0.5) * hx(); }
  double y(int j) const { return y0 + (j + 0.5) * hy(); }
  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(ny) + static_cast<std::size_t>(j);
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Real-valued field on a GridSpec. Value type; copies are deep.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const GridSpec& grid, double fill = 0.0);

  template <class F>
  static ScalarField from_function(const GridSpec& grid, F&& f) {
    ScalarField out(grid);
    for (int i = 0; i < grid.nx; ++i)
      for (int j = 0; j < grid.ny; ++j) out(i, j) = f(grid.x(i), grid.y(j));
    return out;
  }

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
  double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double s);
  /// this += s * other
  ScalarField& axpy(double s, const ScalarField& other);

  bool all_finite() const;
  double min() const;
  double max() const;
  double max_abs() const;
  /// Arithmetic mean of the cell values (equals the area-weighted mean).
  double mean() const;

  friend bool operator==(const ScalarField&, const ScalarField&) = default;

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);
ScalarField operator*(ScalarField a, double s);
/// Pointwise product.
ScalarField multiply(const ScalarField& a, const ScalarField& b);

/// Throws std::invalid_argument when the fields live on different grids.
void require_conformable(const ScalarField& a, const ScalarField& b);

struct VectorField {
  ScalarField x;
  ScalarField y;
};

/// Staggered (face) gradient with homogeneous Neumann walls.
///
/// x-component at slot (i, j) is (f(i+1,j) - f(i,j)) / hx, the centred
/// difference at the face x_{i+1/2}; the last slot i = nx-1 is the wall face
/// and holds 0 (ghost reflection f(nx,j) = f(nx-1,j)). Same for y.
VectorField gradient(const ScalarField& f);

/// Negative adjoint of gradient(): backward differences with zero flux
/// through every wall, so <divergence(v), f> = -<v, gradient(f)> exactly and
/// divergence(gradient(f)) == laplacian(f).
ScalarField divergence(const VectorField& v);

/// 5-point Neumann Laplacian (ghost reflection). Eigenvectors are the 2D
/// discrete cosine modes.
ScalarField laplacian(const ScalarField& f);

/// Midpoint-rule L2 inner product sum f_ij g_ij hx hy, accumulated with
/// compensated summation.
double inner(const ScalarField& f, const ScalarField& g);
double inner(const VectorField& u, const VectorField& v);
/// ||f||^2
double norm_sq(const ScalarField& f);
/// ||grad_h f||^2 using the staggered gradient.
double grad_norm_sq(const ScalarField& f);
/// Midpoint-rule integral of f.
double integral(const ScalarField& f);

/// Full gradient vectors on the interior faces of both families.
///
/// On x-faces the normal component is the staggered difference and the
/// tangential component is the average of the centred y-differences of the
/// two adjacent cells; y-faces analogously. Wall slots (i = nx-1 in xface,
/// j = ny-1 in yface) are zero in the normal component and must be ignored
/// by consumers.
struct FaceGradients {
  VectorField xface;
  VectorField yface;
};
FaceGradients face_gradients(const ScalarField& f);

/// Sum with Neumaier compensation.
class CompensatedSum {
 public:
  void add(double v);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace dendrite

#endif  // DENDRITE_GRID_HPP_
