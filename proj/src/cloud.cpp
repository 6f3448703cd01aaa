#include "efg/cloud.hpp"

#include <algorithm>
#include <cmath>

#include "efg/errors.hpp"

namespace efg {

const std::vector<NodeId>& NodeCloud::set(const std::string& name) const
{
  auto it = node_sets.find(name);
  if (it == node_sets.end())
    throw ConfigError("unknown node set '" + name + "'");
  return it->second;
}

void NodeCloud::validate() const
{
  for (std::size_t i = 0; i < coords.size(); ++i)
    if (!coords[i].allFinite())
      throw DataError("node " + std::to_string(i) + " has a non-finite coordinate");
  for (const auto& [name, ids] : node_sets)
    for (NodeId id : ids)
      if (id >= coords.size())
        throw DataError("node set '" + name + "' references node " + std::to_string(id) +
                        " but the cloud has " + std::to_string(coords.size()) + " nodes");
}

double signed_tet_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d)
{
  return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

double IntegrationGrid::cell_volume(std::size_t c) const
{
  const auto& t = cells[c];
  return signed_tet_volume(vertices[t[0]], vertices[t[1]], vertices[t[2]], vertices[t[3]]);
}

double IntegrationGrid::total_volume() const
{
  double v = 0.0;
  for (std::size_t c = 0; c < cells.size(); ++c)
    v += cell_volume(c);
  return v;
}

void IntegrationGrid::validate() const
{
  if (region.size() != cells.size())
    throw DataError("region id count does not match cell count");
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (NodeId id : cells[c])
      if (id >= vertices.size())
        throw DataError("cell " + std::to_string(c) + " references vertex " + std::to_string(id) +
                        " out of range");
    if (std::abs(cell_volume(c)) < 1e-18)
      throw DataError("cell " + std::to_string(c) + " is degenerate");
  }
}

Model generate_cube_grid(double edge, int nodes_per_edge)
{
  if (nodes_per_edge < 2)
    throw ConfigError("cube grid needs at least 2 nodes per edge");
  if (!(edge > 0.0))
    throw ConfigError("cube edge must be positive");

  const int n = nodes_per_edge;
  const double h = edge / (n - 1);
  auto id = [n](int i, int j, int k) { return static_cast<NodeId>(i + n * (j + n * k)); };

  Model m;
  auto& cloud = m.cloud;
  cloud.coords.reserve(static_cast<std::size_t>(n) * n * n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        cloud.coords.emplace_back(i * h, j * h, k * h);
  // exact end coordinates regardless of h rounding
  for (auto& p : cloud.coords)
    for (int a = 0; a < 3; ++a)
      if (std::abs(p[a] - edge) < 0.25 * h)
        p[a] = edge;

  auto& sets = cloud.node_sets;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const NodeId v = id(i, j, k);
        if (k == 0) sets["bottom"].push_back(v);
        if (k == n - 1) sets["top"].push_back(v);
        if (i == 0) sets["xmin"].push_back(v);
        if (i == n - 1) sets["xmax"].push_back(v);
        if (j == 0) sets["ymin"].push_back(v);
        if (j == n - 1) sets["ymax"].push_back(v);
      }
  for (auto& [name, ids] : sets)
    std::sort(ids.begin(), ids.end());

  // Kuhn split: one tet per permutation of the axes, walking 000 -> 111.
  static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                      {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  auto& grid = m.grid;
  grid.vertices = cloud.coords;
  grid.vertices_are_nodes = true;
  grid.cells.reserve(static_cast<std::size_t>(6) * (n - 1) * (n - 1) * (n - 1));
  for (int k = 0; k + 1 < n; ++k)
    for (int j = 0; j + 1 < n; ++j)
      for (int i = 0; i + 1 < n; ++i)
        for (const auto& p : perms) {
          std::array<int, 3> c{i, j, k};
          std::array<NodeId, 4> t{};
          t[0] = id(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            ++c[p[s]];
            t[s + 1] = id(c[0], c[1], c[2]);
          }
          if (signed_tet_volume(grid.vertices[t[0]], grid.vertices[t[1]], grid.vertices[t[2]],
                                grid.vertices[t[3]]) < 0.0)
            std::swap(t[2], t[3]);
          grid.cells.push_back(t);
        }
  grid.region.assign(grid.cells.size(), 0);
  return m;
}

double average_spacing(const Model& model)
{
  if (model.cloud.size() == 0)
    return 0.0;
  return std::cbrt(model.grid.total_volume() / static_cast<double>(model.cloud.size()));
}

}  // namespace efg
