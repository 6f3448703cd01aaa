#include <cmath>

#include "efg/cloud.hpp"

namespace efg {

std::vector<GaussPoint> gauss_points(const IntegrationGrid& grid)
{
  const double alpha = (5.0 - std::sqrt(5.0)) / 20.0;
  const double beta = (5.0 + 3.0 * std::sqrt(5.0)) / 20.0;

  std::vector<GaussPoint> out;
  out.reserve(4 * grid.size());
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const auto& t = grid.cells[c];
    const Vec3* v[4] = {&grid.vertices[t[0]], &grid.vertices[t[1]], &grid.vertices[t[2]],
                        &grid.vertices[t[3]]};
    const double w = std::abs(grid.cell_volume(c)) / 4.0;
    for (int q = 0; q < 4; ++q) {
      Vec3 x = Vec3::Zero();
      for (int k = 0; k < 4; ++k)
        x += (k == q ? beta : alpha) * *v[k];
      out.push_back({x, w, static_cast<std::uint32_t>(c), grid.region[c]});
    }
  }
  return out;
}

}  // namespace efg
