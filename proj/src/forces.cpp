#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "efg/errors.hpp"
#include "efg/solver.hpp"

namespace efg {
namespace {

int thread_id()
{
#ifdef _OPENMP
  return omp_get_thread_num();
#else
  return 0;
#endif
}

Mat3 deformation_gradient(const ShapeTable& t, std::size_t p, std::span<const Vec3> u)
{
  Mat3 f = Mat3::Identity();
  for (std::size_t e = t.row_begin(p); e < t.row_end(p); ++e)
    f.noalias() += u[t.nodes[e]] * t.grad[e].transpose();
  return f;
}

}  // namespace

ForceAssembler::ForceAssembler(const ShapeTable& table, const MaterialTable& materials,
                               ForceOptions options)
    : table_(&table), options_(options)
{
  if (table.grad.size() != table.nodes.size())
    throw ConfigError("shape table has no gradients");
  options_.workers = std::max(1, options_.workers);
  mu_.resize(table.points());
  kappa_.resize(table.points());
  for (std::size_t p = 0; p < table.points(); ++p) {
    const auto& m = materials.at(table.region[p]);
    mu_[p] = m.shear_modulus();
    kappa_[p] = m.bulk_modulus();
  }

  if (options_.deterministic) {
    node_offsets_.assign(table.node_count + 1, 0);
    for (NodeId id : table.nodes)
      ++node_offsets_[id + 1];
    for (std::size_t i = 0; i < table.node_count; ++i)
      node_offsets_[i + 1] += node_offsets_[i];
    node_entries_.resize(table.nodes.size());
    std::vector<std::uint32_t> fill(node_offsets_.begin(), node_offsets_.end() - 1);
    for (std::size_t e = 0; e < table.nodes.size(); ++e)
      node_entries_[fill[table.nodes[e]]++] = static_cast<std::uint32_t>(e);
    entry_force_.resize(table.nodes.size());
  } else if (options_.workers > 1) {
    thread_buffers_.assign(static_cast<std::size_t>(options_.workers),
                           std::vector<Vec3>(table.node_count));
  }
}

double ForceAssembler::point_contribution(std::size_t p, std::span<const Vec3> u, Vec3* out,
                                          long) const
{
  const ShapeTable& t = *table_;
  const Mat3 f = deformation_gradient(t, p, u);
  const double jac = f.determinant();
  if (!(jac > 0.0))
    return jac;
  const Mat3 pk1 = t.weight[p] * (f * neo_hookean_pk2(f, jac, mu_[p], kappa_[p]));
  const std::size_t b = t.row_begin(p);
  for (std::size_t e = b; e < t.row_end(p); ++e)
    out[e - b] = pk1 * t.grad[e];
  return jac;
}

double ForceAssembler::assemble(std::span<const Vec3> u, std::vector<Vec3>& f_int, long step)
{
  const ShapeTable& t = *table_;
  const std::size_t np = t.points();
  const long n = static_cast<long>(np);
  f_int.assign(t.node_count, Vec3::Zero());

  double jmin = std::numeric_limits<double>::infinity();
  long bad = n;  // lowest failing point

  if (options_.deterministic) {
#pragma omp parallel for num_threads(options_.workers) schedule(static) reduction(min : jmin, bad)
    for (long p = 0; p < n; ++p) {
      const double j = point_contribution(static_cast<std::size_t>(p), u,
                                          entry_force_.data() + t.row_begin(static_cast<std::size_t>(p)), step);
      jmin = std::min(jmin, j);
      if (!(j > 0.0))
        bad = std::min(bad, p);
    }
    if (bad == n) {
      const long nn = static_cast<long>(t.node_count);
#pragma omp parallel for num_threads(options_.workers) schedule(static)
      for (long i = 0; i < nn; ++i) {
        Vec3 acc = Vec3::Zero();
        for (std::uint32_t k = node_offsets_[i]; k < node_offsets_[i + 1]; ++k)
          acc += entry_force_[node_entries_[k]];
        f_int[static_cast<std::size_t>(i)] = acc;
      }
    }
  } else if (options_.workers == 1) {
    Vec3 local[512];
    std::vector<Vec3> big;
    for (std::size_t p = 0; p < np; ++p) {
      const std::size_t len = t.row_end(p) - t.row_begin(p);
      Vec3* out = local;
      if (len > 512) {
        big.resize(len);
        out = big.data();
      }
      const double j = point_contribution(p, u, out, step);
      jmin = std::min(jmin, j);
      if (!(j > 0.0)) {
        bad = static_cast<long>(p);
        break;
      }
      const std::size_t b = t.row_begin(p);
      for (std::size_t k = 0; k < len; ++k)
        f_int[t.nodes[b + k]] += out[k];
    }
  } else {
    for (auto& buf : thread_buffers_)
      std::fill(buf.begin(), buf.end(), Vec3::Zero());
#pragma omp parallel num_threads(options_.workers) reduction(min : jmin, bad)
    {
      auto& buf = thread_buffers_[static_cast<std::size_t>(thread_id())];
      std::vector<Vec3> out;
#pragma omp for schedule(static)
      for (long p = 0; p < n; ++p) {
        const std::size_t up = static_cast<std::size_t>(p);
        out.resize(t.row_end(up) - t.row_begin(up));
        const double j = point_contribution(up, u, out.data(), step);
        jmin = std::min(jmin, j);
        if (!(j > 0.0)) {
          bad = std::min(bad, p);
          continue;
        }
        for (std::size_t k = 0; k < out.size(); ++k)
          buf[t.nodes[t.row_begin(up) + k]] += out[k];
      }
    }
    // combine in thread order
    for (const auto& buf : thread_buffers_)
      for (std::size_t i = 0; i < t.node_count; ++i)
        f_int[i] += buf[i];
  }

  if (bad != n) {
    const Mat3 f = deformation_gradient(t, static_cast<std::size_t>(bad), u);
    throw InversionError(static_cast<std::size_t>(bad), step, f.determinant());
  }
  return jmin;
}

std::vector<Vec3> internal_forces(const ShapeTable& table, const MaterialTable& materials,
                                  std::span<const Vec3> u, ForceOptions options)
{
  ForceAssembler a(table, materials, options);
  std::vector<Vec3> f;
  a.assemble(u, f);
  return f;
}

double min_jacobian(const ShapeTable& table, std::span<const Vec3> u)
{
  double jmin = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < table.points(); ++p)
    jmin = std::min(jmin, deformation_gradient(table, p, u).determinant());
  return jmin;
}

}  // namespace efg
