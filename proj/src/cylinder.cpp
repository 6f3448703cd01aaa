#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "efg/cloud.hpp"
#include "efg/errors.hpp"

namespace efg {
namespace {

// Ring and layer pitch relative to the requested spacing. Calibrated so the
// node counts of the generated clouds track the reference cylinder clouds
// (about 1.1e3 nodes at 8.22 mm, 7e3 at 4.44 mm for a 100 mm cylinder).
constexpr double kPitchFactor = 1.15;

using Tri = std::array<NodeId, 3>;

// Disk triangulation over hexagonal rings: ring k (k >= 1) holds 6k nodes.
// Ids are local to the layer, centre first.
std::vector<Tri> triangulate_rings(int rings)
{
  std::vector<Tri> tris;
  auto ring_start = [](int k) { return k == 0 ? 0u : static_cast<NodeId>(1 + 3 * k * (k - 1)); };
  if (rings < 1)
    return tris;
  for (int j = 0; j < 6; ++j)
    tris.push_back({0, ring_start(1) + j, ring_start(1) + (j + 1) % 6});

  for (int k = 2; k <= rings; ++k) {
    const int ni = 6 * (k - 1);
    const int no = 6 * k;
    const NodeId si = ring_start(k - 1);
    const NodeId so = ring_start(k);
    int i = 0, o = 0;
    while (i < ni || o < no) {
      const double next_inner = static_cast<double>(i + 1) / ni;
      const double next_outer = static_cast<double>(o + 1) / no;
      if (o == no || (i < ni && next_inner < next_outer)) {
        tris.push_back({si + i % ni, si + (i + 1) % ni, so + o % no});
        ++i;
      } else {
        tris.push_back({si + i % ni, so + (o + 1) % no, so + o % no});
        ++o;
      }
    }
  }
  return tris;
}

// Splits the prism (bottom a,b,c; top a',b',c') into 3 tets so that every
// quad face is cut along the diagonal through its smallest global id, which
// makes the split conforming between neighbouring prisms.
void split_prism(const std::array<NodeId, 6>& v, std::vector<std::array<NodeId, 4>>& out)
{
  static constexpr int rotate[6][6] = {{0, 1, 2, 3, 4, 5}, {1, 2, 0, 4, 5, 3},
                                       {2, 0, 1, 5, 3, 4}, {3, 5, 4, 0, 2, 1},
                                       {4, 3, 5, 1, 0, 2}, {5, 4, 3, 2, 1, 0}};
  const int imin = static_cast<int>(std::min_element(v.begin(), v.end()) - v.begin());
  std::array<NodeId, 6> p{};
  for (int k = 0; k < 6; ++k)
    p[k] = v[rotate[imin][k]];
  if (std::min(p[1], p[5]) < std::min(p[2], p[4])) {
    out.push_back({p[0], p[1], p[2], p[5]});
    out.push_back({p[0], p[1], p[5], p[4]});
    out.push_back({p[0], p[4], p[5], p[3]});
  } else {
    out.push_back({p[0], p[1], p[2], p[4]});
    out.push_back({p[0], p[4], p[2], p[5]});
    out.push_back({p[0], p[4], p[5], p[3]});
  }
}

}  // namespace

Model generate_cylinder_grid(double height, double diameter, double target_spacing)
{
  if (!(height > 0.0) || !(diameter > 0.0) || !(target_spacing > 0.0))
    throw ConfigError("cylinder dimensions and spacing must be positive");

  const double radius = 0.5 * diameter;
  const double pitch = kPitchFactor * target_spacing;
  const int rings = std::max(1, static_cast<int>(std::lround(radius / pitch)));
  // even layer gap count so that z = height/2 is a node layer
  const int gaps = 2 * std::max(1, static_cast<int>(std::lround(height / (2.0 * pitch))));
  const NodeId per_layer = static_cast<NodeId>(1 + 3 * rings * (rings + 1));

  std::vector<Vec3> layer;
  layer.reserve(per_layer);
  layer.emplace_back(0.0, 0.0, 0.0);
  for (int k = 1; k <= rings; ++k) {
    const double r = radius * k / rings;
    const int nk = 6 * k;
    for (int j = 0; j < nk; ++j) {
      const double theta = 2.0 * std::numbers::pi * j / nk;
      layer.emplace_back(r * std::cos(theta), r * std::sin(theta), 0.0);
    }
  }

  Model m;
  auto& cloud = m.cloud;
  cloud.coords.reserve(static_cast<std::size_t>(per_layer) * (gaps + 1));
  for (int l = 0; l <= gaps; ++l) {
    const double z = (l == gaps) ? height : height * l / gaps;
    for (const auto& p : layer)
      cloud.coords.emplace_back(p.x(), p.y(), z);
  }
  auto& bottom = cloud.node_sets["bottom"];
  auto& top = cloud.node_sets["top"];
  for (NodeId i = 0; i < per_layer; ++i) {
    bottom.push_back(i);
    top.push_back(static_cast<NodeId>(gaps) * per_layer + i);
  }

  const auto tris = triangulate_rings(rings);
  auto& grid = m.grid;
  grid.vertices = cloud.coords;
  grid.vertices_are_nodes = true;
  grid.cells.reserve(tris.size() * 3 * gaps);
  for (int l = 0; l < gaps; ++l) {
    const NodeId lo = static_cast<NodeId>(l) * per_layer;
    const NodeId hi = lo + per_layer;
    for (const auto& t : tris)
      split_prism({lo + t[0], lo + t[1], lo + t[2], hi + t[0], hi + t[1], hi + t[2]}, grid.cells);
  }
  for (auto& t : grid.cells)
    if (signed_tet_volume(grid.vertices[t[0]], grid.vertices[t[1]], grid.vertices[t[2]],
                          grid.vertices[t[3]]) < 0.0)
      std::swap(t[2], t[3]);
  grid.region.assign(grid.cells.size(), 0);
  return m;
}

}  // namespace efg
