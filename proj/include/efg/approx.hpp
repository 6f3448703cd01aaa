#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "efg/cloud.hpp"

namespace efg {

/// Polynomial basis in local coordinates. Quadratic order is
/// [1, x, y, z, x^2, y^2, z^2, xy, xz, yz].
enum class BasisKind { constant, linear, quadratic };

int basis_size(BasisKind kind) noexcept;

/// Fills p (size basis_size) and, if dp is given, dp(j, k) = d p_j / d x_k.
void eval_basis(BasisKind kind, const Vec3& x, double* p, Eigen::Matrix<double, 10, 3>* dp = nullptr);

struct WeightSpec {
  enum class Kind { regularized, exponential };
  Kind kind = Kind::regularized;
  double epsilon = 1e-5;    // regularized: dimensionless
  double shape_ratio = 3.0;  // exponential (comparison only): c = r_SD / shape_ratio
};

/// Regularized weight: ((q + e)^-2 - (1 + e)^-2) / (e^-2 - (1 + e)^-2) with
/// q = (r / r_SD)^2; zero for r >= r_SD.
double weight_regularized(double r, double r_sd, double epsilon);

/// Shifted Gaussian, zero at r_SD. Not interpolating; kept for comparison.
double weight_exponential(double r, double r_sd, double shape_ratio = 3.0);

/// Weight value and its derivative with respect to r^2.
struct WeightValue {
  double w;
  double dw_dr2;
};
WeightValue eval_weight(const WeightSpec& spec, double r2, double r_sd);

/// Penalties on the six second-degree coefficients, each relative to the
/// mean diagonal entry of the moment matrix at the evaluation point.
struct MmlsConstraints {
  std::array<double, 6> mu{1e-7, 1e-7, 1e-7, 1e-7, 1e-7, 1e-7};

  static MmlsConstraints none() { return {{0, 0, 0, 0, 0, 0}}; }
  static MmlsConstraints uniform(double m) { return {{m, m, m, m, m, m}}; }
  bool all_positive() const noexcept;
};

/// Constraint matrix H: zero except the trailing diag(mu). dim 2 gives 6x6
/// (uses mu[0..2]), dim 3 gives 10x10.
Eigen::MatrixXd constraint_matrix(int dim, const MmlsConstraints& c);

struct ApproxParams {
  BasisKind basis = BasisKind::quadratic;
  WeightSpec weight;
  MmlsConstraints constraints;
};

/// Shape functions and reference gradients at one evaluation point.
struct ShapeEval {
  std::vector<NodeId> nodes;
  std::vector<double> phi;
  std::vector<Vec3> grad;  // 1/m; empty if gradients were not requested
  double rcond = 0.0;      // of the equilibrated regularized moment matrix
  int basis_terms = 0;     // may be below the requested basis after fallback
};

/// phi = p^T (P^T W P + H)^-1 P^T W, gradients by the product rule with
/// d(A^-1)/dx_k = -A^-1 A_,k A^-1. H is scaled by the mean diagonal of the
/// moment matrix, so H_,k carries the derivative of that scale. Nodes with
/// zero weight are
/// dropped. With all mu > 0 a numerically singular system falls back to the
/// next lower basis (quadratic -> linear -> constant); with any mu == 0 it
/// throws SingularityError.
ShapeEval shape_mmls(const Vec3& x, const SupportQuery& support, const NodeCloud& cloud,
                     const ApproxParams& params, bool with_gradient = true);

void write_shape_csv(std::ostream& out, const ShapeEval& eval);

struct KroneckerSample {
  NodeId node;
  double deviation;  // max_i |phi_i(x_j) - delta_ij|
  double bound;      // ((r_min / r_SD)^-4 - 1) eps^2
  double r_min;
  double r_sd;
};

struct KroneckerAudit {
  std::vector<KroneckerSample> samples;
  double max_deviation = 0.0;
  double max_bound = 0.0;
  double worst_ratio = 0.0;  // max over samples of deviation / bound
};

struct SupportSettings {
  std::size_t n_min = 10;
  double radius_factor = 1.8;
};

/// Builds shape functions at n_sample randomly chosen nodes (all nodes if
/// n_sample >= cloud size) and measures the departure from the Kronecker
/// delta property.
KroneckerAudit kronecker_audit(const NeighborIndex& index, std::size_t n_sample,
                               const ApproxParams& params, const SupportSettings& support = {},
                               std::uint64_t seed = 1);

/// Worst |analytic - central FD| over neighbours and axes, relative to the
/// largest analytic gradient component in the support.
double gradient_check(const Vec3& x, const SupportQuery& support, const NodeCloud& cloud,
                      const ApproxParams& params, double step);

}  // namespace efg
