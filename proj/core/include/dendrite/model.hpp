#ifndef DENDRITE_MODEL_HPP_
#define DENDRITE_MODEL_HPP_

#include <functional>
#include <string>

#include "dendrite/grid.hpp"

namespace dendrite {

/// Relaxation coefficient rho(phi) > 0 of the phase equation; the mobility
/// is M = 1 / rho.
class Mobility {
 public:
  Mobility() = default;
  static Mobility constant(double rho);
  /// rho(phi) = (rho_s + rho_l)/2 + (rho_s - rho_l)/2 * clamp(phi, -1, 1)
  static Mobility linear(double rho_solid, double rho_liquid);
  static Mobility field(std::function<double(double)> rho_of_phi, std::string description);

  bool is_constant() const { return !fn_; }
  /// Only meaningful when is_constant().
  double constant_value() const { return rho_; }
  double operator()(double phi) const { return fn_ ? fn_(phi) : rho_; }
  ScalarField rho(const ScalarField& phi) const;
  const std::string& description() const { return description_; }

  // bookkeeping for config round-trips
  double rho_solid() const { return rho_solid_; }
  double rho_liquid() const { return rho_liquid_; }

 private:
  double rho_ = 1.0;
  double rho_solid_ = 0.0;
  double rho_liquid_ = 0.0;
  std::function<double(double)> fn_;
  std::string description_ = "constant";
};

/// Physical and stabilisation constants of the model.
struct ModelParams {
  double eps = 0.1;      ///< interface width
  double lambda = 1.0;   ///< coupling (kinetic) coefficient
  double diff = 1.0;     ///< temperature diffusivity D
  double latent = 1.0;   ///< latent heat K
  double sigma = 0.0;    ///< anisotropy strength, in [0, 1)
  int mode = 4;          ///< anisotropy mode; only 4 is supported
  Mobility mobility = Mobility::constant(1.0);
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;
  double s4 = 0.0;
  double bconst = 1.0;   ///< energy shift B keeping E1 positive
  /// Regularisation added to |grad phi|^2 in kappa and H; <= 0 selects
  /// 1e-12 / eps^2.
  double reg = 0.0;

  /// Throws ConfigKeyError naming the first violated constraint.
  void validate() const;
  double regularization() const { return reg > 0.0 ? reg : 1e-12 / (eps * eps); }
  /// lambda / (eps K), the weight of T in the energies.
  double temp_weight() const { return lambda / (eps * latent); }
};

/// Optional forcing for the phase and temperature equations, evaluated at
/// the new time level. Absent providers mean zero forcing.
struct SourceTerms {
  std::function<ScalarField(const GridSpec&, double)> phi;
  std::function<ScalarField(const GridSpec&, double)> temp;
  bool empty() const { return !phi && !temp; }
};

// Pointwise potentials.
inline double well_potential(double p) { return 0.25 * (p * p - 1.0) * (p * p - 1.0); }
inline double well_derivative(double p) { return p * p * p - p; }
inline double latent_heat(double p) {
  const double p3 = p * p * p;
  return 0.2 * p3 * p * p - (2.0 / 3.0) * p3 + p;
}
inline double latent_heat_derivative(double p) { return (p * p - 1.0) * (p * p - 1.0); }

/// F(phi) = (phi^2 - 1)^2 / 4
ScalarField well_potential(const ScalarField& phi);
/// f(phi) = F'(phi) = phi^3 - phi
ScalarField well_derivative(const ScalarField& phi);
/// h(phi) = phi^5/5 - 2 phi^3/3 + phi
ScalarField latent_heat(const ScalarField& phi);
/// h'(phi) = (phi^2 - 1)^2
ScalarField latent_heat_derivative(const ScalarField& phi);

/// Fourfold anisotropy 1 + sigma cos(4 theta), with cos(4 theta) written as
/// (gx^4 - 6 gx^2 gy^2 + gy^4) / (|g|^2 + reg)^2.
double anisotropy(double gx, double gy, double sigma, double reg);
/// H = d kappa / d(grad phi) = 16 sigma (gx(gx^2 gy^2 - gy^4), gy(gx^2 gy^2 - gx^4)) / (|g|^2 + reg)^3
void anisotropy_derivative(double gx, double gy, double sigma, double reg, double& hx, double& hy);

ScalarField anisotropy(const VectorField& g, double sigma, double reg);
VectorField anisotropy_derivative(const VectorField& g, double sigma, double reg);

/// Stabilised explicit residual
///   g(phi) = -div((kappa^2 - S1) grad phi + kappa |grad phi|^2 H) + (f(phi) - S2 phi)/eps^2.
/// The flux is evaluated on cell faces (see face_gradients()); for sigma = 0
/// it reduces to (1 - S1) grad_h phi exactly.
ScalarField stabilized_residual(const ScalarField& phi, const ModelParams& p);

/// 1/2 int kappa^2 |grad phi|^2: isotropic part from the staggered gradient,
/// the anisotropic excess (kappa^2 - 1)|grad phi|^2 by face quadrature.
double gradient_energy(const ScalarField& phi, const ModelParams& p);

/// E1(phi) = int 1/2 (kappa^2 - S1)|grad phi|^2 + (F(phi) - S2 phi^2/2)/eps^2 + B.
/// Throws ConfigError when the result is not positive.
double e1_energy(const ScalarField& phi, const ModelParams& p);

/// int (lambda/(2 eps K) T^2 + S1/2 |grad phi|^2 + S2/(2 eps^2) phi^2 - B) + R^2
double modified_energy(const ScalarField& phi, double r, const ScalarField& temp, const ModelParams& p);

/// int (1/2 kappa^2 |grad phi|^2 + F(phi)/eps^2 + lambda/(2 eps K) T^2)
double original_energy(const ScalarField& phi, const ScalarField& temp, const ModelParams& p);

}  // namespace dendrite

#endif  // DENDRITE_MODEL_HPP_
