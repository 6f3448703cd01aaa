#include "efg/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>

#include "efg/errors.hpp"

namespace efg {

double uniaxial_residual(double stretch, double jacobian, const MaterialParams& params)
{
  const double mu = params.shear_modulus();
  const double kappa = params.bulk_modulus();
  const double j53 = std::pow(jacobian, 5.0 / 3.0);
  return mu / 6.0 * (jacobian / stretch - stretch * stretch) +
         0.5 * kappa * (j53 * jacobian - j53);
}

UniaxialSolution solve_uniaxial_J(double stretch, const MaterialParams& params)
{
  if (!(stretch > 0.0))
    throw OracleError("axial stretch must be positive");
  auto g = [&](double j) { return uniaxial_residual(stretch, j, params); };
  double lo = 1e-3, hi = 10.0;
  double glo = g(lo), ghi = g(hi);
  if (glo == 0.0)
    return {stretch, lo, std::sqrt(lo / stretch)};
  if (ghi == 0.0)
    return {stretch, hi, std::sqrt(hi / stretch)};
  if ((glo > 0.0) == (ghi > 0.0))
    throw OracleError("no sign change of the uniaxial residual in [1e-3, 10] for stretch " +
                      std::to_string(stretch));

  for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm == 0.0) {
      lo = hi = mid;
      break;
    }
    if ((gm > 0.0) == (glo > 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }

  double j0 = lo, j1 = hi;
  double g0 = g(j0), g1 = g(j1);
  double best = std::abs(g0) < std::abs(g1) ? j0 : j1;
  double gbest = std::min(std::abs(g0), std::abs(g1));
  const double tol = 1e-14 * params.shear_modulus();
  for (int it = 0; it < 20 && gbest > tol && g1 != g0; ++it) {
    const double j2 = j1 - g1 * (j1 - j0) / (g1 - g0);
    if (!(j2 > 0.0) || !std::isfinite(j2))
      break;
    j0 = j1;
    g0 = g1;
    j1 = j2;
    g1 = g(j1);
    if (std::abs(g1) < gbest) {
      best = j1;
      gbest = std::abs(g1);
    }
  }
  return {stretch, best, std::sqrt(best / stretch)};
}

Vec3 analytical_cube_displacement(const Vec3& x, const UniaxialSolution& sol, const Vec3& anchor,
                                  double base_z)
{
  return {(sol.lateral - 1.0) * (x.x() - anchor.x()), (sol.lateral - 1.0) * (x.y() - anchor.y()),
          (sol.stretch - 1.0) * (x.z() - base_z)};
}

ErrorReport error_norms(std::span<const Vec3> numerical, std::span<const Vec3> reference)
{
  if (numerical.size() != reference.size())
    throw ConfigError("fields differ in length");
  ErrorReport r;
  r.nodes = numerical.size();
  if (r.nodes == 0)
    return r;
  const double n = static_cast<double>(r.nodes);
  for (int k = 0; k < 3; ++k) {
    double sq = 0.0, lo = reference[0][k], hi = reference[0][k], mx = 0.0;
    for (std::size_t i = 0; i < r.nodes; ++i) {
      const double d = numerical[i][k] - reference[i][k];
      mx = std::max(mx, std::abs(d));
      sq += d * d;
      lo = std::min(lo, reference[i][k]);
      hi = std::max(hi, reference[i][k]);
    }
    const double range = hi - lo;
    const auto uk = static_cast<std::size_t>(k);
    r.linf[uk] = mx;
    if (range > 0.0) {
      r.nrmse[uk] = std::sqrt(sq / n) / range;
      r.nrmse_scaled[uk] = std::sqrt(sq / range) / n;
    } else {
      r.normalized[uk] = false;
      r.nrmse[uk] = std::sqrt(sq / n);
      r.nrmse_scaled[uk] = std::sqrt(sq) / n;
    }
  }
  return r;
}

BcAuditEntry bc_audit_nodes(const NeighborIndex& index, std::span<const Vec3> u,
                            const std::string& name, std::span<const NodeId> ids,
                            const ApproxSettings& approx)
{
  if (u.size() != index.cloud().size())
    throw ConfigError("displacement field does not match node count");
  const ShapeTable t = shape_table_at_nodes(index, ids, approx);
  BcAuditEntry e{name, ids.size(), 0.0, 0.0};
  double sum = 0.0;
  for (std::size_t r = 0; r < ids.size(); ++r) {
    Vec3 uh = Vec3::Zero();
    for (std::size_t k = t.row_begin(r); k < t.row_end(r); ++k)
      uh += t.phi[k] * u[t.nodes[k]];
    const Vec3 d = u[ids[r]] - uh;
    e.linf = std::max(e.linf, d.cwiseAbs().maxCoeff());
    sum += d.squaredNorm();
  }
  if (!ids.empty())
    e.l2 = std::sqrt(sum) / static_cast<double>(ids.size());
  return e;
}

std::vector<BcAuditEntry> bc_audit(const NeighborIndex& index, std::span<const Vec3> u,
                                   std::span<const std::string> sets, const ApproxSettings& approx)
{
  std::vector<BcAuditEntry> out;
  for (const auto& name : sets)
    out.push_back(bc_audit_nodes(index, u, name, index.cloud().set(name), approx));
  return out;
}

MidplaneResult midplane_check(const NodeCloud& cloud, std::span<const Vec3> u, double height,
                              double uz_max, double band)
{
  if (u.size() != cloud.size())
    throw ConfigError("displacement field does not match node count");
  MidplaneResult r;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (std::abs(cloud.coords[i].z() - 0.5 * height) > band)
      continue;
    ++r.nodes;
    r.deviation = std::max(r.deviation, std::abs(u[i].z() - 0.5 * uz_max));
  }
  if (r.nodes == 0)
    throw DataError("no nodes within the mid-plane band");
  return r;
}

void write_report_csv(std::ostream& out, std::span<const ReportRow> rows)
{
  out << "benchmark,grid,component,metric,value\n" << std::setprecision(6);
  for (const auto& r : rows)
    out << r.benchmark << ',' << r.grid << ',' << r.component << ',' << r.metric << ','
        << r.value << '\n';
}

}  // namespace efg
