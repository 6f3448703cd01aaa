#pragma once

#include <cmath>
#include <map>

#include "efg/cloud.hpp"

namespace efg {

/// Compressible neo-Hookean solid,
/// W = mu/2 (I1bar - 3) + kappa/2 (J - 1)^2.
struct MaterialParams {
  double youngs = 0.0;   // Pa
  double poisson = 0.0;
  double density = 0.0;  // kg/m^3

  /// Validates E > 0, -1 < nu < 0.5, rho > 0.
  static MaterialParams from(double youngs, double poisson, double density);

  double shear_modulus() const noexcept { return youngs / (2.0 * (1.0 + poisson)); }
  double bulk_modulus() const noexcept { return youngs / (3.0 * (1.0 - 2.0 * poisson)); }
  double lame_lambda() const noexcept { return bulk_modulus() - 2.0 * shear_modulus() / 3.0; }
  /// Dilatational wave speed sqrt((lambda + 2 mu) / rho).
  double wave_speed() const noexcept;
};

/// Region id -> material.
class MaterialTable {
public:
  MaterialTable() = default;
  explicit MaterialTable(MaterialParams single) { by_region_[0] = single; }

  void set(int region, MaterialParams params) { by_region_[region] = params; }
  const MaterialParams& at(int region) const;
  const std::map<int, MaterialParams>& regions() const noexcept { return by_region_; }

private:
  std::map<int, MaterialParams> by_region_;
};

double strain_energy(const Mat3& f, const MaterialParams& params);
Mat3 second_pk_stress(const Mat3& f, const MaterialParams& params);

/// Same law expressed in the right Cauchy-Green tensor C = F^T F.
double strain_energy_from_c(const Mat3& c, const MaterialParams& params);
Mat3 second_pk_stress_from_c(const Mat3& c, const MaterialParams& params);

/// Kernel used by the solver: S for given F with J = det F > 0 precomputed.
inline Mat3 neo_hookean_pk2(const Mat3& f, double jac, double mu, double kappa)
{
  const Mat3 c = f.transpose() * f;
  // inverse of symmetric C via cofactors; det C = J^2
  Mat3 cinv;
  cinv(0, 0) = c(1, 1) * c(2, 2) - c(1, 2) * c(2, 1);
  cinv(0, 1) = c(0, 2) * c(2, 1) - c(0, 1) * c(2, 2);
  cinv(0, 2) = c(0, 1) * c(1, 2) - c(0, 2) * c(1, 1);
  cinv(1, 1) = c(0, 0) * c(2, 2) - c(0, 2) * c(2, 0);
  cinv(1, 2) = c(0, 2) * c(1, 0) - c(0, 0) * c(1, 2);
  cinv(2, 2) = c(0, 0) * c(1, 1) - c(0, 1) * c(1, 0);
  cinv(1, 0) = cinv(0, 1);
  cinv(2, 0) = cinv(0, 2);
  cinv(2, 1) = cinv(1, 2);
  cinv /= jac * jac;
  const double j23 = std::pow(jac, -2.0 / 3.0);
  const double tr = c.trace();
  return mu * j23 * (Mat3::Identity() - (tr / 3.0) * cinv) + kappa * jac * (jac - 1.0) * cinv;
}

struct UniaxialCauchy {
  double lateral;  // sigma_11 = sigma_22, Pa
  double axial;    // sigma_33, Pa
};

/// Principal Cauchy stresses for stretches (sqrt(J/l), sqrt(J/l), l).
UniaxialCauchy principal_cauchy_uniaxial(double stretch, double jacobian, const MaterialParams& params);

}  // namespace efg
