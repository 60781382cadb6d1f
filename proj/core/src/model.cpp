#include "dendrite/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dendrite/errors.hpp"

namespace dendrite {

Mobility Mobility::constant(double rho) {
  Mobility m;
  m.rho_ = rho;
  m.description_ = "constant";
  return m;
}

Mobility Mobility::linear(double rho_solid, double rho_liquid) {
  Mobility m;
  m.rho_solid_ = rho_solid;
  m.rho_liquid_ = rho_liquid;
  m.rho_ = 0.5 * (rho_solid + rho_liquid);
  m.fn_ = [rho_solid, rho_liquid](double phi) {
    const double s = std::clamp(phi, -1.0, 1.0);
    return 0.5 * (rho_solid + rho_liquid) + 0.5 * (rho_solid - rho_liquid) * s;
  };
  m.description_ = "linear";
  return m;
}

Mobility Mobility::field(std::function<double(double)> rho_of_phi, std::string description) {
  Mobility m;
  m.fn_ = std::move(rho_of_phi);
  m.description_ = std::move(description);
  return m;
}

ScalarField Mobility::rho(const ScalarField& phi) const {
  ScalarField out(phi.grid(), rho_);
  if (fn_) {
    for (std::size_t k = 0; k < phi.size(); ++k) out[k] = fn_(phi[k]);
  }
  return out;
}

void ModelParams::validate() const {
  auto fail = [](const char* key, const std::string& msg) { throw InvalidValueError(key, std::string(key) + ": " + msg); };
  if (!(eps > 0.0)) fail("eps", "interface width must be positive");
  if (!(lambda >= 0.0)) fail("lambda", "coupling coefficient must be non-negative");
  if (!(diff > 0.0)) fail("diff", "temperature diffusivity must be positive");
  if (!(latent > 0.0)) fail("latent", "latent heat parameter must be positive");
  if (!(sigma >= 0.0 && sigma < 1.0)) fail("sigma", "anisotropy strength must lie in [0, 1)");
  if (mode != 4) fail("mode", "only fourfold anisotropy (mode = 4) is supported");
  if (mobility.is_constant()) {
    if (!(mobility.constant_value() > 0.0)) fail("rho", "mobility coefficient must be positive");
  } else if (mobility.description() == "linear") {
    if (!(mobility.rho_solid() > 0.0)) fail("rho_solid", "must be positive");
    if (!(mobility.rho_liquid() > 0.0)) fail("rho_liquid", "must be positive");
  }
  if (!(s1 >= 0.0)) fail("s1", "must be non-negative");
  if (s1 > 0.0 && !(s1 < (1.0 - sigma) * (1.0 - sigma))) {
    std::ostringstream os;
    os << "s1: must satisfy 0 < s1 < (1 - sigma)^2 = " << (1.0 - sigma) * (1.0 - sigma);
    throw StabilizerBoundError("s1", os.str());
  }
  if (!(s2 >= 0.0)) fail("s2", "must be non-negative");
  if (!(s3 >= 0.0)) fail("s3", "must be non-negative");
  if (!(s4 >= 0.0)) fail("s4", "must be non-negative");
  if (!(bconst > 0.0)) fail("bconst", "energy shift B must be positive");
  if (!std::isfinite(reg) || reg < 0.0) fail("reg", "must be finite and non-negative");
}

namespace {

template <class F>
ScalarField map_field(const ScalarField& phi, F&& f) {
  ScalarField out(phi.grid());
  for (std::size_t k = 0; k < phi.size(); ++k) out[k] = f(phi[k]);
  return out;
}

// 1/2 sum over interior faces of both families of (kappa^2 - 1)|g|^2 hx hy.
double anisotropic_excess(const FaceGradients& fg, const ModelParams& p) {
  if (p.sigma == 0.0) return 0.0;
  const GridSpec& g = fg.xface.x.grid();
  const double reg = p.regularization();
  CompensatedSum s;
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      if (i < g.nx - 1) {
        const double gx = fg.xface.x(i, j), gy = fg.xface.y(i, j);
        const double k = anisotropy(gx, gy, p.sigma, reg);
        s.add((k * k - 1.0) * (gx * gx + gy * gy));
      }
      if (j < g.ny - 1) {
        const double gx = fg.yface.x(i, j), gy = fg.yface.y(i, j);
        const double k = anisotropy(gx, gy, p.sigma, reg);
        s.add((k * k - 1.0) * (gx * gx + gy * gy));
      }
    }
  }
  return 0.5 * s.value() * g.cell_area();
}

}  // namespace

ScalarField well_potential(const ScalarField& phi) {
  return map_field(phi, [](double v) { return well_potential(v); });
}
ScalarField well_derivative(const ScalarField& phi) {
  return map_field(phi, [](double v) { return well_derivative(v); });
}
ScalarField latent_heat(const ScalarField& phi) {
  return map_field(phi, [](double v) { return latent_heat(v); });
}
ScalarField latent_heat_derivative(const ScalarField& phi) {
  return map_field(phi, [](double v) { return latent_heat_derivative(v); });
}

double anisotropy(double gx, double gy, double sigma, double reg) {
  const double gx2 = gx * gx;
  const double gy2 = gy * gy;
  const double d = gx2 + gy2 + reg;
  return 1.0 + sigma * (gx2 * gx2 - 6.0 * gx2 * gy2 + gy2 * gy2) / (d * d);
}

void anisotropy_derivative(double gx, double gy, double sigma, double reg, double& hx, double& hy) {
  const double gx2 = gx * gx;
  const double gy2 = gy * gy;
  const double d = gx2 + gy2 + reg;
  const double scale = 16.0 * sigma / (d * d * d);
  hx = scale * gx * (gx2 * gy2 - gy2 * gy2);
  hy = scale * gy * (gx2 * gy2 - gx2 * gx2);
}

ScalarField anisotropy(const VectorField& g, double sigma, double reg) {
  require_conformable(g.x, g.y);
  ScalarField out(g.x.grid());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = anisotropy(g.x[k], g.y[k], sigma, reg);
  return out;
}

VectorField anisotropy_derivative(const VectorField& g, double sigma, double reg) {
  require_conformable(g.x, g.y);
  VectorField out{ScalarField(g.x.grid()), ScalarField(g.x.grid())};
  for (std::size_t k = 0; k < g.x.size(); ++k) {
    anisotropy_derivative(g.x[k], g.y[k], sigma, reg, out.x[k], out.y[k]);
  }
  return out;
}

ScalarField stabilized_residual(const ScalarField& phi, const ModelParams& p) {
  const GridSpec& g = phi.grid();
  const double reg = p.regularization();
  const FaceGradients fg = face_gradients(phi);

  VectorField flux{ScalarField(g), ScalarField(g)};
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      double hx = 0.0, hy = 0.0;
      if (i < g.nx - 1) {
        const double gx = fg.xface.x(i, j), gy = fg.xface.y(i, j);
        const double k = anisotropy(gx, gy, p.sigma, reg);
        anisotropy_derivative(gx, gy, p.sigma, reg, hx, hy);
        flux.x(i, j) = (k * k - p.s1) * gx + k * (gx * gx + gy * gy) * hx;
      }
      if (j < g.ny - 1) {
        const double gx = fg.yface.x(i, j), gy = fg.yface.y(i, j);
        const double k = anisotropy(gx, gy, p.sigma, reg);
        anisotropy_derivative(gx, gy, p.sigma, reg, hx, hy);
        flux.y(i, j) = (k * k - p.s1) * gy + k * (gx * gx + gy * gy) * hy;
      }
    }
  }

  ScalarField out = divergence(flux);
  const double inv_eps2 = 1.0 / (p.eps * p.eps);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = -out[k] + (well_derivative(phi[k]) - p.s2 * phi[k]) * inv_eps2;
  }
  return out;
}

double gradient_energy(const ScalarField& phi, const ModelParams& p) {
  return 0.5 * grad_norm_sq(phi) + 0.5 * anisotropic_excess(face_gradients(phi), p);
}

double e1_energy(const ScalarField& phi, const ModelParams& p) {
  const double inv_eps2 = 1.0 / (p.eps * p.eps);
  CompensatedSum bulk;
  for (double v : phi.values()) bulk.add((well_potential(v) - 0.5 * p.s2 * v * v) * inv_eps2);
  const double e1 = gradient_energy(phi, p) - 0.5 * p.s1 * grad_norm_sq(phi) +
                    bulk.value() * phi.grid().cell_area() + p.bconst * phi.grid().area();
  if (!(e1 > 0.0)) {
    std::ostringstream os;
    os << "E1(phi) = " << e1 << " is not positive; increase the energy shift bconst (currently "
       << p.bconst << ")";
    throw ConfigError(os.str());
  }
  return e1;
}

double modified_energy(const ScalarField& phi, double r, const ScalarField& temp, const ModelParams& p) {
  require_conformable(phi, temp);
  return 0.5 * p.temp_weight() * norm_sq(temp) + 0.5 * p.s1 * grad_norm_sq(phi) +
         0.5 * p.s2 / (p.eps * p.eps) * norm_sq(phi) - p.bconst * phi.grid().area() + r * r;
}

double original_energy(const ScalarField& phi, const ScalarField& temp, const ModelParams& p) {
  require_conformable(phi, temp);
  return gradient_energy(phi, p) + integral(well_potential(phi)) / (p.eps * p.eps) +
         0.5 * p.temp_weight() * norm_sq(temp);
}

}  // namespace dendrite
