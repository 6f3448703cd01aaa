#pragma once

#include <array>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "efg/cloud.hpp"
#include "efg/material.hpp"
#include "efg/solver.hpp"

namespace efg {

/// Homogeneous uniaxial state: axial stretch, volume ratio, lateral stretch.
struct UniaxialSolution {
  double stretch;
  double jacobian;
  double lateral;  // sqrt(J / stretch)
};

/// (mu/6)(J/l - l^2) + (kappa/2)(J^(8/3) - J^(5/3)); zero when the lateral
/// Cauchy stress vanishes.
double uniaxial_residual(double stretch, double jacobian, const MaterialParams& params);

/// Root in J of uniaxial_residual on [1e-3, 10]: bisection, then secant
/// polish. Throws OracleError when the bracket has no sign change.
UniaxialSolution solve_uniaxial_J(double stretch, const MaterialParams& params);

/// Homogeneous deformation: the axial coordinate scales by the stretch from
/// base_z, lateral coordinates scale by the lateral stretch about anchor
/// (x, y components used).
Vec3 analytical_cube_displacement(const Vec3& x, const UniaxialSolution& sol, const Vec3& anchor,
                                  double base_z = 0.0);

struct ErrorReport {
  std::size_t nodes = 0;
  std::array<double, 3> linf{};
  std::array<double, 3> nrmse{};        // sqrt(mean sq) / range
  std::array<double, 3> nrmse_scaled{};  // (1/N) sqrt(sum sq / range)
  std::array<bool, 3> normalized{true, true, true};  // false: range was 0, plain RMSE reported
};

ErrorReport error_norms(std::span<const Vec3> numerical, std::span<const Vec3> reference);

struct BcAuditEntry {
  std::string set_name;
  std::size_t nodes = 0;
  double linf = 0.0;  // max |u - u^h| over nodes and components
  double l2 = 0.0;    // (1/N) sqrt(sum |u - u^h|^2)
};

/// Reconstructs u^h = sum phi_i(x_j) u_i at the given nodes and compares it
/// with the nodal values u_j.
BcAuditEntry bc_audit_nodes(const NeighborIndex& index, std::span<const Vec3> u,
                            const std::string& name, std::span<const NodeId> nodes,
                            const ApproxSettings& approx);

/// Reconstructs u^h = sum phi_i(x_j) u_i at every node of each named set
/// and compares it with the nodal values u_j.
std::vector<BcAuditEntry> bc_audit(const NeighborIndex& index, std::span<const Vec3> u,
                                   std::span<const std::string> sets, const ApproxSettings& approx);

struct MidplaneResult {
  double deviation = 0.0;  // max |u_z - 0.5 u_z^max|
  std::size_t nodes = 0;
};

/// Nodes with |z - height/2| <= band. Throws DataError on an empty band.
MidplaneResult midplane_check(const NodeCloud& cloud, std::span<const Vec3> u, double height,
                              double uz_max, double band);

struct ReportRow {
  std::string benchmark;
  std::string grid;
  std::string component;
  std::string metric;
  double value;
};

void write_report_csv(std::ostream& out, std::span<const ReportRow> rows);

}  // namespace efg
