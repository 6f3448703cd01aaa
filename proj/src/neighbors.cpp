#include <algorithm>
#include <cmath>
#include <limits>

#include "efg/cloud.hpp"
#include "efg/errors.hpp"

namespace efg {

NeighborIndex::NeighborIndex(const NodeCloud& cloud) : cloud_(&cloud)
{
  const auto& pts = cloud.coords;
  if (pts.empty())
    throw DataError("neighbour index over an empty cloud");

  Vec3 lo = pts.front(), hi = pts.front();
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  diameter_ = (hi - lo).norm();
  const Vec3 extent = (hi - lo).cwiseMax(Vec3::Constant(1e-12 * std::max(1.0, diameter_)));
  // roughly one node per bucket
  double vol = 1.0;
  int flat_axes = 0;
  for (int a = 0; a < 3; ++a) {
    if (extent[a] > 1e-9 * diameter_)
      vol *= extent[a];
    else
      ++flat_axes;
  }
  const double n = static_cast<double>(pts.size());
  cell_ = flat_axes == 3 ? 1.0 : std::pow(vol / n, 1.0 / (3 - flat_axes));
  if (!(cell_ > 0.0) || !std::isfinite(cell_))
    cell_ = std::max(diameter_, 1.0);
  lo_ = lo;
  for (int a = 0; a < 3; ++a)
    dims_[a] = std::max<long>(1, static_cast<long>(extent[a] / cell_) + 1);

  const std::size_t nb = static_cast<std::size_t>(dims_[0] * dims_[1] * dims_[2]);
  std::vector<std::uint32_t> count(nb + 1, 0);
  std::vector<std::size_t> slot(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto b = bucket_of(pts[i]);
    slot[i] = static_cast<std::size_t>(b[0] + dims_[0] * (b[1] + dims_[1] * b[2]));
    ++count[slot[i] + 1];
  }
  for (std::size_t b = 0; b < nb; ++b)
    count[b + 1] += count[b];
  bucket_start_ = count;
  bucket_nodes_.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    bucket_nodes_[count[slot[i]]++] = static_cast<NodeId>(i);

  spacing_.resize(pts.size());
  nearest_.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto nn = k_nearest(static_cast<NodeId>(i), 4);
    double sum = 0.0;
    for (const auto& [d, id] : nn)
      sum += d;
    spacing_[i] = nn.empty() ? cell_ : sum / static_cast<double>(nn.size());
    nearest_[i] = nn.empty() ? cell_ : nn.front().first;
  }
}

std::array<long, 3> NeighborIndex::bucket_of(const Vec3& x) const
{
  std::array<long, 3> b{};
  for (int a = 0; a < 3; ++a) {
    const double f = std::floor((x[a] - lo_[a]) / cell_);
    b[a] = std::clamp(static_cast<long>(std::clamp(f, -1.0, 1e15)), 0L, dims_[a] - 1);
  }
  return b;
}

std::vector<NodeId> NeighborIndex::within(const Vec3& x, double radius) const
{
  std::vector<NodeId> out;
  const auto& pts = cloud_->coords;
  const auto b0 = bucket_of(x - Vec3::Constant(radius));
  const auto b1 = bucket_of(x + Vec3::Constant(radius));
  const double r2 = radius * radius;
  for (long k = b0[2]; k <= b1[2]; ++k)
    for (long j = b0[1]; j <= b1[1]; ++j)
      for (long i = b0[0]; i <= b1[0]; ++i) {
        const std::size_t b = static_cast<std::size_t>(i + dims_[0] * (j + dims_[1] * k));
        for (std::uint32_t s = bucket_start_[b]; s < bucket_start_[b + 1]; ++s) {
          const NodeId id = bucket_nodes_[s];
          if ((pts[id] - x).squaredNorm() <= r2)
            out.push_back(id);
        }
      }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<double, NodeId>> NeighborIndex::k_nearest(NodeId i, std::size_t k) const
{
  const auto& pts = cloud_->coords;
  const std::size_t want = std::min(k, pts.size() - 1);
  std::vector<std::pair<double, NodeId>> found;
  if (want == 0)
    return found;
  for (double r = cell_;; r *= 1.5) {
    found.clear();
    for (NodeId id : within(pts[i], r))
      if (id != i)
        found.emplace_back((pts[id] - pts[i]).norm(), id);
    if (found.size() >= want)
      break;
  }
  std::partial_sort(found.begin(), found.begin() + static_cast<long>(want), found.end());
  found.resize(want);
  return found;
}

NodeId NeighborIndex::nearest(const Vec3& x) const
{
  const auto& pts = cloud_->coords;
  for (double r = cell_;; r *= 1.5) {
    const auto ids = within(x, r);
    if (ids.empty())
      continue;
    NodeId best = ids.front();
    double bd = std::numeric_limits<double>::infinity();
    for (NodeId id : ids) {
      const double d = (pts[id] - x).squaredNorm();
      if (d < bd) {
        bd = d;
        best = id;
      }
    }
    return best;
  }
}

double default_support_radius(const Vec3& x, const NeighborIndex& index, double factor)
{
  return factor * index.node_spacing(index.nearest(x));
}

SupportQuery find_support(const Vec3& x, const NeighborIndex& index, std::size_t n_min,
                          double r_init)
{
  if (!(r_init > 0.0))
    throw ConfigError("initial support radius must be positive");
  const auto& pts = index.cloud().coords;
  const double limit = 2.0 * std::max(index.diameter(), r_init);
  SupportQuery q;
  for (double r = r_init;; r *= 1.2) {
    if (r > limit)
      throw DataError("support radius exceeded twice the domain diameter without reaching " +
                      std::to_string(n_min) + " nodes");
    auto ids = index.within(x, r);
    // nodes at exactly r_SD carry zero weight
    std::erase_if(ids, [&](NodeId id) { return (pts[id] - x).norm() >= r; });
    if (ids.size() >= n_min) {
      q.nodes = std::move(ids);
      q.radius = r;
      return q;
    }
  }
}

}  // namespace efg
