#include "efg/approx.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <iterator>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/LU>

#include "efg/errors.hpp"

namespace efg {
namespace {

using MatN = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 10, 10>;
using VecN = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 10, 1>;
using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1, 0, 10, 1>;
using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic, 0, 10, 10>;

constexpr double kSingularRcond = 1e-12;

std::string point_str(const Vec3& x)
{
  std::ostringstream ss;
  ss << std::setprecision(10) << '(' << x.x() << ", " << x.y() << ", " << x.z() << ')';
  return ss.str();
}

struct ActiveNode {
  NodeId id;
  double w;
  Vec3 dw;  // gradient of w with respect to the evaluation point
  Eigen::Matrix<double, 10, 1> p;
};

BasisKind lower(BasisKind k)
{
  return k == BasisKind::quadratic ? BasisKind::linear : BasisKind::constant;
}

}  // namespace

int basis_size(BasisKind kind) noexcept
{
  switch (kind) {
  case BasisKind::constant: return 1;
  case BasisKind::linear: return 4;
  case BasisKind::quadratic: return 10;
  }
  return 0;
}

void eval_basis(BasisKind kind, const Vec3& x, double* p, Eigen::Matrix<double, 10, 3>* dp)
{
  p[0] = 1.0;
  if (dp)
    dp->setZero();
  if (kind == BasisKind::constant)
    return;
  p[1] = x.x();
  p[2] = x.y();
  p[3] = x.z();
  if (dp) {
    (*dp)(1, 0) = 1.0;
    (*dp)(2, 1) = 1.0;
    (*dp)(3, 2) = 1.0;
  }
  if (kind == BasisKind::linear)
    return;
  p[4] = x.x() * x.x();
  p[5] = x.y() * x.y();
  p[6] = x.z() * x.z();
  p[7] = x.x() * x.y();
  p[8] = x.x() * x.z();
  p[9] = x.y() * x.z();
  if (dp) {
    auto& d = *dp;
    d(4, 0) = 2.0 * x.x();
    d(5, 1) = 2.0 * x.y();
    d(6, 2) = 2.0 * x.z();
    d(7, 0) = x.y();
    d(7, 1) = x.x();
    d(8, 0) = x.z();
    d(8, 2) = x.x();
    d(9, 1) = x.z();
    d(9, 2) = x.y();
  }
}

double weight_regularized(double r, double r_sd, double epsilon)
{
  if (r >= r_sd)
    return 0.0;
  const double q = (r / r_sd) * (r / r_sd);
  const double tail = 1.0 / ((1.0 + epsilon) * (1.0 + epsilon));
  return (1.0 / ((q + epsilon) * (q + epsilon)) - tail) / (1.0 / (epsilon * epsilon) - tail);
}

double weight_exponential(double r, double r_sd, double shape_ratio)
{
  if (r >= r_sd)
    return 0.0;
  const double c = r_sd / shape_ratio;
  const double edge = std::exp(-(r_sd / c) * (r_sd / c));
  return (std::exp(-(r / c) * (r / c)) - edge) / (1.0 - edge);
}

WeightValue eval_weight(const WeightSpec& spec, double r2, double r_sd)
{
  const double rsd2 = r_sd * r_sd;
  if (r2 >= rsd2)
    return {0.0, 0.0};
  if (spec.kind == WeightSpec::Kind::regularized) {
    const double e = spec.epsilon;
    const double q = r2 / rsd2;
    const double tail = 1.0 / ((1.0 + e) * (1.0 + e));
    const double denom = 1.0 / (e * e) - tail;
    const double qe = q + e;
    const double w = (1.0 / (qe * qe) - tail) / denom;
    const double dw_dq = -2.0 / (qe * qe * qe) / denom;
    return {w, dw_dq / rsd2};
  }
  const double c2 = rsd2 / (spec.shape_ratio * spec.shape_ratio);
  const double edge = std::exp(-rsd2 / c2);
  const double g = std::exp(-r2 / c2);
  return {(g - edge) / (1.0 - edge), -g / c2 / (1.0 - edge)};
}

bool MmlsConstraints::all_positive() const noexcept
{
  return std::all_of(mu.begin(), mu.end(), [](double m) { return m > 0.0; });
}

Eigen::MatrixXd constraint_matrix(int dim, const MmlsConstraints& c)
{
  if (dim != 2 && dim != 3)
    throw ConfigError("constraint matrix is defined for 2D and 3D only");
  const int m = dim == 2 ? 6 : 10;
  const int linear = dim + 1;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
  for (int k = linear; k < m; ++k)
    h(k, k) = c.mu[static_cast<std::size_t>(k - linear)];
  return h;
}

ShapeEval shape_mmls(const Vec3& x, const SupportQuery& support, const NodeCloud& cloud,
                     const ApproxParams& params, bool with_gradient)
{
  const double s = support.radius;
  if (!(s > 0.0))
    throw ConfigError("support radius must be positive");

  std::vector<ActiveNode> active;
  active.reserve(support.nodes.size());
  for (NodeId id : support.nodes) {
    const Vec3 d = x - cloud.coords[id];
    const WeightValue wv = eval_weight(params.weight, d.squaredNorm(), s);
    if (!(wv.w > 0.0))
      continue;
    ActiveNode a{id, wv.w, 2.0 * wv.dw_dr2 * d, {}};
    eval_basis(BasisKind::quadratic, (cloud.coords[id] - x) / s, a.p.data());
    active.push_back(a);
  }
  if (active.empty())
    throw SingularityError("no node with positive weight at " + point_str(x));
  if (active.size() == 1) {
    ShapeEval out;
    out.nodes = {active[0].id};
    out.phi = {1.0};
    if (with_gradient)
      out.grad = {Vec3::Zero()};
    out.rcond = 1.0;
    out.basis_terms = 1;
    return out;
  }

  const bool regularized = params.constraints.all_positive();
  BasisKind kind = params.basis;
  for (;;) {
    const int m = basis_size(kind);
    MatL al = MatL::Zero(m, m);
    for (const auto& n : active) {
      const auto pl = n.p.head(m).cast<long double>();
      al.noalias() += static_cast<long double>(n.w) * pl * pl.transpose();
    }
    double mean_diag = 0.0;
    if (kind == BasisKind::quadratic) {
      mean_diag = static_cast<double>(al.trace() / m);
      for (int k = 4; k < 10; ++k)
        al(k, k) += params.constraints.mu[static_cast<std::size_t>(k - 4)] * mean_diag;
    }
    const MatN a = al.cast<double>();

    VecN scale(m);
    bool singular = false;
    for (int k = 0; k < m; ++k) {
      if (!(a(k, k) > 0.0)) {
        singular = true;
        break;
      }
      scale[k] = 1.0 / std::sqrt(a(k, k));
    }
    double rcond = 0.0;
    Eigen::PartialPivLU<MatN> lu;
    if (!singular) {
      const MatN eq = scale.asDiagonal() * a * scale.asDiagonal();
      lu.compute(eq);
      rcond = lu.rcond();
      singular = !(rcond >= kSingularRcond);
    }
    if (singular) {
      if (regularized && kind != BasisKind::constant) {
        kind = lower(kind);
        continue;
      }
      throw SingularityError("singular moment matrix at " + point_str(x));
    }
    // one step of iterative refinement, carried in long double
    auto solve = [&](const VecL& rhs) -> VecL {
      VecL y = (scale.asDiagonal() * lu.solve(VecN(scale.asDiagonal() * rhs.cast<double>()))).cast<long double>();
      VecN r(m);
      for (int i = 0; i < m; ++i) {
        long double acc = rhs[i];
        for (int j = 0; j < m; ++j)
          acc -= al(i, j) * y[j];
        r[i] = static_cast<double>(acc);
      }
      y += (scale.asDiagonal() * lu.solve(VecN(scale.asDiagonal() * r))).cast<long double>();
      return y;
    };
    auto dot = [&](const VecL& g, const ActiveNode& n) {
      long double acc = 0.0L;
      for (int j = 0; j < m; ++j)
        acc += g[j] * static_cast<long double>(n.p[j]);
      return acc;
    };

    double p0[10];
    Eigen::Matrix<double, 10, 3> dp0;
    eval_basis(kind, Vec3::Zero(), p0, &dp0);
    const VecL gamma = solve(Eigen::Map<const VecN>(p0, m).cast<long double>());

    ShapeEval out;
    out.rcond = rcond;
    out.basis_terms = m;
    out.nodes.reserve(active.size());
    out.phi.reserve(active.size());
    std::vector<long double> gp(active.size());
    for (std::size_t i = 0; i < active.size(); ++i) {
      gp[i] = dot(gamma, active[i]);
      out.nodes.push_back(active[i].id);
      out.phi.push_back(static_cast<double>(active[i].w * gp[i]));
    }
    if (!with_gradient)
      return out;

    // the penalty scale follows the mean diagonal, which moves with x through
    // the weights and the local frame
    Vec3 dscale = Vec3::Zero();
    if (mean_diag > 0.0) {
      Eigen::Matrix<double, 10, 3> dpi;
      double pi[10];
      for (const auto& n : active) {
        eval_basis(BasisKind::quadratic, n.p.segment<3>(1), pi, &dpi);
        dscale += n.dw * n.p.squaredNorm() - (2.0 * n.w / s) * (dpi.transpose() * n.p);
      }
      dscale /= m;
    }

    out.grad.assign(active.size(), Vec3::Zero());
    for (int k = 0; k < 3; ++k) {
      // rhs = p_,k - (A_,k + H_,k) gamma
      VecL rhs = (dp0.col(k).head(m) / s).cast<long double>();
      for (std::size_t i = 0; i < active.size(); ++i)
        for (int j = 0; j < m; ++j)
          rhs[j] -= active[i].dw[k] * gp[i] * active[i].p[j];
      if (mean_diag > 0.0)
        for (int j = 4; j < 10; ++j)
          rhs[j] -= params.constraints.mu[static_cast<std::size_t>(j - 4)] * dscale[k] * gamma[j];
      const VecL dgamma = solve(rhs);
      for (std::size_t i = 0; i < active.size(); ++i)
        out.grad[i][k] = static_cast<double>(active[i].w * dot(dgamma, active[i]) + active[i].dw[k] * gp[i]);
    }
    return out;
  }
}

void write_shape_csv(std::ostream& out, const ShapeEval& eval)
{
  out << "node_id,phi,dphidx,dphidy,dphidz\n" << std::setprecision(17);
  for (std::size_t i = 0; i < eval.nodes.size(); ++i) {
    const Vec3 g = eval.grad.empty() ? Vec3::Zero() : eval.grad[i];
    out << eval.nodes[i] << ',' << eval.phi[i] << ',' << g.x() << ',' << g.y() << ',' << g.z()
        << '\n';
  }
}

KroneckerAudit kronecker_audit(const NeighborIndex& index, std::size_t n_sample,
                               const ApproxParams& params, const SupportSettings& settings,
                               std::uint64_t seed)
{
  const auto& cloud = index.cloud();
  std::vector<NodeId> all(cloud.size());
  for (NodeId i = 0; i < all.size(); ++i)
    all[i] = i;
  std::vector<NodeId> picked;
  if (n_sample >= all.size()) {
    picked = all;
  } else {
    std::mt19937_64 rng(seed);
    std::sample(all.begin(), all.end(), std::back_inserter(picked), n_sample, rng);
  }

  const double eps = params.weight.epsilon;
  KroneckerAudit audit;
  for (NodeId j : picked) {
    const Vec3& xj = cloud.coords[j];
    const auto support =
        find_support(xj, index, settings.n_min, settings.radius_factor * index.node_spacing(j));
    const auto eval = shape_mmls(xj, support, cloud, params, false);

    KroneckerSample s{j, 0.0, 0.0, 0.0, support.radius};
    for (std::size_t i = 0; i < eval.nodes.size(); ++i)
      s.deviation = std::max(s.deviation, std::abs(eval.phi[i] - (eval.nodes[i] == j ? 1.0 : 0.0)));

    double rmin = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < support.nodes.size(); ++a)
      for (std::size_t b = a + 1; b < support.nodes.size(); ++b)
        rmin = std::min(rmin, (cloud.coords[support.nodes[a]] - cloud.coords[support.nodes[b]]).norm());
    if (std::isfinite(rmin)) {
      s.r_min = rmin;
      s.bound = (std::pow(rmin / support.radius, -4.0) - 1.0) * eps * eps;
    }
    audit.max_deviation = std::max(audit.max_deviation, s.deviation);
    audit.max_bound = std::max(audit.max_bound, s.bound);
    if (s.bound > 0.0)
      audit.worst_ratio = std::max(audit.worst_ratio, s.deviation / s.bound);
    audit.samples.push_back(s);
  }
  return audit;
}

double gradient_check(const Vec3& x, const SupportQuery& support, const NodeCloud& cloud,
                      const ApproxParams& params, double step)
{
  const auto base = shape_mmls(x, support, cloud, params, true);
  double scale = 0.0;
  for (const auto& g : base.grad)
    scale = std::max(scale, g.cwiseAbs().maxCoeff());
  if (scale == 0.0)
    return 0.0;

  auto lookup = [](const ShapeEval& e, NodeId id) {
    auto it = std::lower_bound(e.nodes.begin(), e.nodes.end(), id);
    return (it != e.nodes.end() && *it == id) ? e.phi[static_cast<std::size_t>(it - e.nodes.begin())]
                                              : 0.0;
  };

  double worst = 0.0;
  for (int k = 0; k < 3; ++k) {
    Vec3 dx = Vec3::Zero();
    dx[k] = step;
    const auto plus = shape_mmls(x + dx, support, cloud, params, false);
    const auto minus = shape_mmls(x - dx, support, cloud, params, false);
    for (std::size_t i = 0; i < base.nodes.size(); ++i) {
      const double fd = (lookup(plus, base.nodes[i]) - lookup(minus, base.nodes[i])) / (2.0 * step);
      worst = std::max(worst, std::abs(fd - base.grad[i][k]) / scale);
    }
  }
  return worst;
}

}  // namespace efg
