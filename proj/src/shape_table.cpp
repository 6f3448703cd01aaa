#include <algorithm>
#include <cmath>

#include "efg/errors.hpp"
#include "efg/solver.hpp"

namespace efg {

ShapeTable build_shape_table(const NeighborIndex& index, std::span<const Vec3> points,
                             std::span<const double> weights, std::span<const int> regions,
                             const ApproxSettings& settings, bool with_gradient)
{
  const auto& cloud = index.cloud();
  const std::size_t n = points.size();
  if (weights.size() != n || regions.size() != n)
    throw ConfigError("shape table inputs differ in length");

  std::vector<ShapeEval> evals(n);
  std::vector<double> radii(n);
  // evaluations are independent; results land in fixed slots
#pragma omp parallel for schedule(dynamic, 64)
  for (std::size_t p = 0; p < n; ++p) {
    const Vec3& x = points[p];
    const auto support = find_support(x, index, settings.support.n_min,
                                      default_support_radius(x, index, settings.support.radius_factor));
    radii[p] = support.radius;
    evals[p] = shape_mmls(x, support, cloud, settings.params, with_gradient);
  }

  ShapeTable t;
  t.node_count = cloud.size();
  t.position.assign(points.begin(), points.end());
  t.weight.assign(weights.begin(), weights.end());
  t.region.assign(regions.begin(), regions.end());
  t.support_radius = std::move(radii);
  std::size_t total = 0;
  for (const auto& e : evals)
    total += e.nodes.size();
  t.offsets.reserve(n + 1);
  t.nodes.reserve(total);
  t.phi.reserve(total);
  if (with_gradient)
    t.grad.reserve(total);

  const int full = basis_size(settings.params.basis);
  for (std::size_t p = 0; p < n; ++p) {
    const auto& e = evals[p];
    double sum = 0.0;
    Vec3 first = Vec3::Zero();
    for (std::size_t i = 0; i < e.nodes.size(); ++i) {
      sum += e.phi[i];
      first += e.phi[i] * (cloud.coords[e.nodes[i]] - points[p]);
    }
    t.max_partition_residual = std::max(t.max_partition_residual, std::abs(sum - 1.0));
    t.max_linear_residual =
        std::max(t.max_linear_residual, first.cwiseAbs().maxCoeff() / t.support_radius[p]);
    t.min_rcond = std::min(t.min_rcond, e.rcond);
    if (e.basis_terms < full)
      ++t.reduced_basis_points;

    t.nodes.insert(t.nodes.end(), e.nodes.begin(), e.nodes.end());
    t.phi.insert(t.phi.end(), e.phi.begin(), e.phi.end());
    if (with_gradient)
      t.grad.insert(t.grad.end(), e.grad.begin(), e.grad.end());
    t.offsets.push_back(static_cast<std::uint32_t>(t.nodes.size()));
  }
  return t;
}

ShapeTable precompute(const NeighborIndex& index, const IntegrationGrid& grid,
                      const ApproxSettings& settings)
{
  const auto gps = gauss_points(grid);
  std::vector<Vec3> pos(gps.size());
  std::vector<double> w(gps.size());
  std::vector<int> reg(gps.size());
  for (std::size_t g = 0; g < gps.size(); ++g) {
    pos[g] = gps[g].position;
    w[g] = gps[g].weight;
    reg[g] = gps[g].region;
  }
  return build_shape_table(index, pos, w, reg, settings, true);
}

ShapeTable shape_table_at_nodes(const NeighborIndex& index, std::span<const NodeId> nodes,
                                const ApproxSettings& settings)
{
  std::vector<Vec3> pos;
  pos.reserve(nodes.size());
  for (NodeId id : nodes) {
    if (id >= index.cloud().size())
      throw DataError("node id " + std::to_string(id) + " out of range");
    pos.push_back(index.cloud().coords[id]);
  }
  const std::vector<double> w(nodes.size(), 0.0);
  const std::vector<int> reg(nodes.size(), 0);
  return build_shape_table(index, pos, w, reg, settings, false);
}

std::vector<double> lump_mass(const ShapeTable& table, const MaterialTable& materials)
{
  std::vector<double> m(table.node_count, 0.0);
  for (std::size_t p = 0; p < table.points(); ++p) {
    const double rho_w = materials.at(table.region[p]).density * table.weight[p];
    for (std::size_t e = table.row_begin(p); e < table.row_end(p); ++e)
      m[table.nodes[e]] += rho_w * table.phi[e];
  }
  for (std::size_t i = 0; i < m.size(); ++i)
    if (!(m[i] > 0.0))
      throw ConfigError("non-positive lumped mass " + std::to_string(m[i]) + " at node " +
                        std::to_string(i) +
                        "; use a larger support radius or a denser integration grid");
  return m;
}

}  // namespace efg
