#include "dendrite/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dendrite/errors.hpp"

namespace dendrite {

GridSpec GridSpec::make(int nx, int ny, double x0, double x1, double y0, double y1) {
  if (nx < 4 || ny < 4) {
    std::ostringstream os;
    os << "grid needs at least 4 cells per direction, got " << nx << "x" << ny;
    throw ConfigError(os.str());
  }
  if (!(x1 > x0) || !(y1 > y0) || !std::isfinite(x0) || !std::isfinite(x1) ||
      !std::isfinite(y0) || !std::isfinite(y1)) {
    throw ConfigError("grid bounds must be finite with x1 > x0 and y1 > y0");
  }
  return GridSpec{nx, ny, x0, x1, y0, y1};
}

ScalarField::ScalarField(const GridSpec& grid, double fill)
    : grid_(grid), values_(grid.size(), fill) {}

void require_conformable(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid()) || a.size() != b.size()) {
    throw std::invalid_argument("fields are not conformable (different grids)");
  }
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require_conformable(*this, other);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  require_conformable(*this, other);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField& ScalarField::axpy(double s, const ScalarField& other) {
  require_conformable(*this, other);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += s * other.values_[k];
  return *this;
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double ScalarField::mean() const {
  CompensatedSum s;
  for (double v : values_) s.add(v);
  return s.value() / static_cast<double>(values_.size());
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }
ScalarField operator*(ScalarField a, double s) { return a *= s; }

ScalarField multiply(const ScalarField& a, const ScalarField& b) {
  require_conformable(a, b);
  ScalarField out(a.grid());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] * b[k];
  return out;
}

VectorField gradient(const ScalarField& f) {
  const GridSpec& g = f.grid();
  const double hx = g.hx();
  const double hy = g.hy();
  VectorField out{ScalarField(g), ScalarField(g)};
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      out.x(i, j) = (i < g.nx - 1) ? (f(i + 1, j) - f(i, j)) / hx : 0.0;
      out.y(i, j) = (j < g.ny - 1) ? (f(i, j + 1) - f(i, j)) / hy : 0.0;
    }
  }
  return out;
}

ScalarField divergence(const VectorField& v) {
  require_conformable(v.x, v.y);
  const GridSpec& g = v.x.grid();
  const double hx = g.hx();
  const double hy = g.hy();
  ScalarField out(g);
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      const double fxp = (i < g.nx - 1) ? v.x(i, j) : 0.0;
      const double fxm = (i > 0) ? v.x(i - 1, j) : 0.0;
      const double fyp = (j < g.ny - 1) ? v.y(i, j) : 0.0;
      const double fym = (j > 0) ? v.y(i, j - 1) : 0.0;
      out(i, j) = (fxp - fxm) / hx + (fyp - fym) / hy;
    }
  }
  return out;
}

// Same floating-point operation sequence as divergence(gradient(f)).
ScalarField laplacian(const ScalarField& f) {
  const GridSpec& g = f.grid();
  const double hx = g.hx();
  const double hy = g.hy();
  ScalarField out(g);
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      const double fxp = (i < g.nx - 1) ? (f(i + 1, j) - f(i, j)) / hx : 0.0;
      const double fxm = (i > 0) ? (f(i, j) - f(i - 1, j)) / hx : 0.0;
      const double fyp = (j < g.ny - 1) ? (f(i, j + 1) - f(i, j)) / hy : 0.0;
      const double fym = (j > 0) ? (f(i, j) - f(i, j - 1)) / hy : 0.0;
      out(i, j) = (fxp - fxm) / hx + (fyp - fym) / hy;
    }
  }
  return out;
}

void CompensatedSum::add(double v) {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v))
    comp_ += (sum_ - t) + v;
  else
    comp_ += (v - t) + sum_;
  sum_ = t;
}

double inner(const ScalarField& f, const ScalarField& g) {
  require_conformable(f, g);
  CompensatedSum s;
  for (std::size_t k = 0; k < f.size(); ++k) s.add(f[k] * g[k]);
  return s.value() * f.grid().cell_area();
}

double inner(const VectorField& u, const VectorField& v) { return inner(u.x, v.x) + inner(u.y, v.y); }

double norm_sq(const ScalarField& f) { return inner(f, f); }

double grad_norm_sq(const ScalarField& f) {
  const VectorField g = gradient(f);
  return inner(g, g);
}

double integral(const ScalarField& f) {
  CompensatedSum s;
  for (double v : f.values()) s.add(v);
  return s.value() * f.grid().cell_area();
}

FaceGradients face_gradients(const ScalarField& f) {
  const GridSpec& g = f.grid();
  const double hx = g.hx();
  const double hy = g.hy();
  const int nx = g.nx;
  const int ny = g.ny;

  // centred differences at cell centres, ghost-reflected at the walls
  auto cdx = [&](int i, int j) {
    const int ip = std::min(i + 1, nx - 1);
    const int im = std::max(i - 1, 0);
    return (f(ip, j) - f(im, j)) / (2.0 * hx);
  };
  auto cdy = [&](int i, int j) {
    const int jp = std::min(j + 1, ny - 1);
    const int jm = std::max(j - 1, 0);
    return (f(i, jp) - f(i, jm)) / (2.0 * hy);
  };

  FaceGradients out{{ScalarField(g), ScalarField(g)}, {ScalarField(g), ScalarField(g)}};
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      if (i < nx - 1) {
        out.xface.x(i, j) = (f(i + 1, j) - f(i, j)) / hx;
        out.xface.y(i, j) = 0.5 * (cdy(i, j) + cdy(i + 1, j));
      }
      if (j < ny - 1) {
        out.yface.x(i, j) = 0.5 * (cdx(i, j) + cdx(i, j + 1));
        out.yface.y(i, j) = (f(i, j + 1) - f(i, j)) / hy;
      }
    }
  }
  return out;
}

}  // namespace dendrite
