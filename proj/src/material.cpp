#include "efg/material.hpp"

#include <cmath>

#include <Eigen/LU>

#include "efg/errors.hpp"

namespace efg {
namespace {

void require_positive_j(double j)
{
  if (!(j > 0.0))
    throw InversionError(0, -1, j);
}

}  // namespace

MaterialParams MaterialParams::from(double youngs, double poisson, double density)
{
  if (!(youngs > 0.0))
    throw ConfigError("Young's modulus must be positive");
  if (!(poisson > -1.0 && poisson < 0.5))
    throw ConfigError("Poisson ratio must lie in (-1, 0.5)");
  if (!(density > 0.0))
    throw ConfigError("density must be positive");
  return {youngs, poisson, density};
}

double MaterialParams::wave_speed() const noexcept
{
  return std::sqrt((lame_lambda() + 2.0 * shear_modulus()) / density);
}

const MaterialParams& MaterialTable::at(int region) const
{
  auto it = by_region_.find(region);
  if (it == by_region_.end())
    throw ConfigError("no material for region " + std::to_string(region));
  return it->second;
}

double strain_energy_from_c(const Mat3& c, const MaterialParams& params)
{
  const double det = c.determinant();
  if (!(det > 0.0))
    throw InversionError(0, -1, det);
  const double j = std::sqrt(det);
  const double i1bar = std::pow(j, -2.0 / 3.0) * c.trace();
  return 0.5 * params.shear_modulus() * (i1bar - 3.0) +
         0.5 * params.bulk_modulus() * (j - 1.0) * (j - 1.0);
}

double strain_energy(const Mat3& f, const MaterialParams& params)
{
  require_positive_j(f.determinant());
  return strain_energy_from_c(f.transpose() * f, params);
}

Mat3 second_pk_stress_from_c(const Mat3& c, const MaterialParams& params)
{
  const double det = c.determinant();
  if (!(det > 0.0))
    throw InversionError(0, -1, det);
  const double j = std::sqrt(det);
  const Mat3 cinv = c.inverse();
  const Mat3 s = params.shear_modulus() * std::pow(j, -2.0 / 3.0) *
                     (Mat3::Identity() - (c.trace() / 3.0) * cinv) +
                 params.bulk_modulus() * j * (j - 1.0) * cinv;
  return 0.5 * (s + s.transpose());
}

Mat3 second_pk_stress(const Mat3& f, const MaterialParams& params)
{
  const double j = f.determinant();
  require_positive_j(j);
  return neo_hookean_pk2(f, j, params.shear_modulus(), params.bulk_modulus());
}

UniaxialCauchy principal_cauchy_uniaxial(double stretch, double jacobian, const MaterialParams& params)
{
  if (!(stretch > 0.0) || !(jacobian > 0.0))
    throw ConfigError("stretch and volume ratio must be positive");
  const double mu = params.shear_modulus();
  const double kappa = params.bulk_modulus();
  const double j53 = std::pow(jacobian, 5.0 / 3.0);
  const double lam2 = stretch * stretch;
  const double jl = jacobian / stretch;
  return {mu / (3.0 * j53) * (jl - lam2) + kappa * (jacobian - 1.0),
          2.0 * mu / (3.0 * j53) * (lam2 - jl) + kappa * (jacobian - 1.0)};
}

}  // namespace efg
