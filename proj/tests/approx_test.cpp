#include <doctest.h>

#include <cmath>
#include <random>

#include "efg/approx.hpp"
#include "efg/errors.hpp"
#include "efg/solver.hpp"

using namespace efg;

namespace {

long double weight_oracle(long double r, long double r_sd, long double e)
{
  const long double q = (r / r_sd) * (r / r_sd);
  const long double a = 1.0L / ((q + e) * (q + e));
  const long double b = 1.0L / ((1.0L + e) * (1.0L + e));
  return (a - b) / (1.0L / (e * e) - b);
}

// Textbook MLS with a quadratic basis in global coordinates and no penalty.
std::vector<double> classic_mls(const Vec3& x, const SupportQuery& s, const NodeCloud& cloud, double eps)
{
  auto basis = [](const Vec3& p) {
    Eigen::Matrix<double, 10, 1> v;
    v << 1, p.x(), p.y(), p.z(), p.x() * p.x(), p.y() * p.y(), p.z() * p.z(), p.x() * p.y(),
        p.x() * p.z(), p.y() * p.z();
    return v;
  };
  Eigen::Matrix<double, 10, 10> a = Eigen::Matrix<double, 10, 10>::Zero();
  std::vector<double> w(s.nodes.size());
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    const Vec3& xi = cloud.coords[s.nodes[i]];
    w[i] = static_cast<double>(weight_oracle((xi - x).norm(), s.radius, eps));
    const auto p = basis(xi);
    a += w[i] * p * p.transpose();
  }
  const Eigen::Matrix<double, 10, 1> g = a.fullPivLu().solve(basis(x));
  std::vector<double> phi(s.nodes.size());
  for (std::size_t i = 0; i < s.nodes.size(); ++i)
    phi[i] = w[i] * basis(cloud.coords[s.nodes[i]]).dot(g);
  return phi;
}

struct Fixture {
  Model model = generate_cube_grid(0.1, 6);
  NeighborIndex index{model.cloud};
  ApproxParams params;

  SupportQuery support(const Vec3& x, std::size_t n_min = 10) const
  {
    return find_support(x, index, n_min, default_support_radius(x, index));
  }
};

}  // namespace

TEST_SUITE("approx") {

TEST_CASE("regularized weight end values")
{
  CHECK(weight_regularized(0.0, 0.3, 1e-5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(weight_regularized(0.3, 0.3, 1e-5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(weight_regularized(0.31, 0.3, 1e-5) == 0.0);
}

TEST_CASE("regularized weight matches extended precision evaluation")
{
  for (double e : {1e-5, 1e-3, 1e-1}) {
    for (double frac : {0.5, 0.1, 0.9, 0.01}) {
      const double r_sd = 0.037;
      const double w = weight_regularized(frac * r_sd, r_sd, e);
      const double ref = static_cast<double>(weight_oracle(frac * r_sd, r_sd, e));
      CAPTURE(e);
      CAPTURE(frac);
      CHECK(std::abs(w - ref) <= 1e-14 * std::abs(ref));
    }
  }
}

TEST_CASE("weight derivative with respect to r squared")
{
  const WeightSpec spec;
  const double r_sd = 0.04, r2 = 0.3 * r_sd * r_sd, h = 1e-7 * r2;
  const auto v = eval_weight(spec, r2, r_sd);
  const double fd = (eval_weight(spec, r2 + h, r_sd).w - eval_weight(spec, r2 - h, r_sd).w) / (2 * h);
  CHECK(v.dw_dr2 == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("partition of unity and linear reproduction on a lattice patch")
{
  Fixture f;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(0.0, 0.1);
  for (int k = 0; k < 50; ++k) {
    const Vec3 x(pos(rng), pos(rng), pos(rng));
    const auto s = f.support(x);
    const auto e = shape_mmls(x, s, f.model.cloud, f.params);
    REQUIRE(e.phi.size() == e.nodes.size());
    REQUIRE(e.grad.size() == e.nodes.size());
    double sum = 0.0;
    Vec3 lin = Vec3::Zero(), gsum = Vec3::Zero();
    Mat3 glin = Mat3::Zero();
    for (std::size_t i = 0; i < e.nodes.size(); ++i) {
      REQUIRE(std::isfinite(e.phi[i]));
      sum += e.phi[i];
      lin += e.phi[i] * f.model.cloud.coords[e.nodes[i]];
      gsum += e.grad[i];
      glin += f.model.cloud.coords[e.nodes[i]] * e.grad[i].transpose();
    }
    CHECK(std::abs(sum - 1.0) < 1e-10);
    CHECK((lin - x).cwiseAbs().maxCoeff() < 1e-8 * s.radius);
    CHECK(gsum.cwiseAbs().maxCoeff() < 1e-8);
    CHECK((glin - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("analytic gradients agree with finite differences")
{
  Fixture f;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(0.01, 0.09);
  for (int k = 0; k < 20; ++k) {
    const Vec3 x(pos(rng), pos(rng), pos(rng));
    const auto s = f.support(x);
    CHECK(gradient_check(x, s, f.model.cloud, f.params, 1e-6 * s.radius) < 1e-5);
  }
}

TEST_CASE("zero penalty reproduces classic moving least squares")
{
  Fixture f;
  f.params.constraints = MmlsConstraints::none();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> pos(0.02, 0.08);
  for (int k = 0; k < 10; ++k) {
    const Vec3 x(pos(rng), pos(rng), pos(rng));
    const auto s = f.support(x, 30);
    const auto e = shape_mmls(x, s, f.model.cloud, f.params, false);
    const auto ref = classic_mls(x, s, f.model.cloud, f.params.weight.epsilon);
    REQUIRE(e.nodes == s.nodes);
    double scale = 0.0;
    for (double v : ref)
      scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < ref.size(); ++i)
      CHECK(std::abs(e.phi[i] - ref[i]) <= 1e-10 * scale);
  }
}

TEST_CASE("coplanar support needs the penalty")
{
  NodeCloud cloud;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      cloud.coords.emplace_back(0.01 * i, 0.01 * j, 0.0);
  SupportQuery s;
  for (NodeId i = 0; i < cloud.size(); ++i)
    s.nodes.push_back(i);
  s.radius = 0.05;
  const Vec3 x(0.012, 0.017, 0.0);

  ApproxParams bare;
  bare.constraints = MmlsConstraints::none();
  CHECK_THROWS_AS(shape_mmls(x, s, cloud, bare), SingularityError);

  const ApproxParams regular;
  const auto e = shape_mmls(x, s, cloud, regular);
  double sum = 0.0;
  for (std::size_t i = 0; i < e.phi.size(); ++i) {
    CHECK(std::isfinite(e.phi[i]));
    CHECK(e.grad[i].allFinite());
    sum += e.phi[i];
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("single node support gives phi = 1")
{
  NodeCloud cloud;
  cloud.coords = {Vec3(0.2, 0.1, 0.3)};
  const SupportQuery s{{0}, 0.05};
  for (const Vec3& x : {Vec3(0.2, 0.1, 0.3), Vec3(0.21, 0.1, 0.29)}) {
    const auto e = shape_mmls(x, s, cloud, ApproxParams{});
    REQUIRE(e.phi.size() == 1);
    CHECK(e.phi[0] == 1.0);
    CHECK(e.grad[0].norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("near-interpolation at a node")
{
  Fixture f;
  const NodeId j = 3 * 36 + 2 * 6 + 2;
  const Vec3 x = f.model.cloud.coords[j];
  const auto s = f.support(x);
  const auto e = shape_mmls(x, s, f.model.cloud, f.params, false);
  double r_min = s.radius;
  for (NodeId id : s.nodes)
    if (id != j)
      r_min = std::min(r_min, (f.model.cloud.coords[id] - x).norm());
  const double eps = f.params.weight.epsilon;
  const double bound = (std::pow(r_min / s.radius, -4.0) - 1.0) * eps * eps;
  double dev = 0.0;
  for (std::size_t i = 0; i < e.nodes.size(); ++i)
    dev = std::max(dev, std::abs(e.phi[i] - (e.nodes[i] == j ? 1.0 : 0.0)));
  CHECK(dev > 0.0);
  CHECK(dev <= 10.0 * bound);
}

TEST_CASE("kronecker audit on the cube lattice")
{
  Fixture f;
  const auto a = kronecker_audit(f.index, 216, f.params);
  CHECK(a.samples.size() == 216);
  CHECK(a.worst_ratio <= 10.0);

  ApproxParams loose = f.params;
  loose.weight.epsilon = 1e-3;
  const auto b = kronecker_audit(f.index, 216, loose);
  CHECK(b.max_deviation > a.max_deviation);
  CHECK(b.max_deviation >= 100.0 * a.max_deviation);
}

TEST_CASE("basis fallback on a degenerate support")
{
  NodeCloud cloud;
  for (int i = 0; i < 6; ++i)
    cloud.coords.emplace_back(0.01 * i, 0.0, 0.0);
  SupportQuery s;
  for (NodeId i = 0; i < cloud.size(); ++i)
    s.nodes.push_back(i);
  s.radius = 0.08;
  const auto e = shape_mmls(Vec3(0.023, 0.0, 0.0), s, cloud, ApproxParams{});
  double sum = 0.0;
  for (double p : e.phi)
    sum += p;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(e.basis_terms <= basis_size(BasisKind::quadratic));
}

TEST_CASE("shape table diagnostics and determinism")
{
  Fixture f;
  const ApproxSettings a;
  const ShapeTable t1 = precompute(f.index, f.model.grid, a);
  const ShapeTable t2 = precompute(f.index, f.model.grid, a);
  CHECK(t1.points() == 3000);
  CHECK(t1.max_partition_residual < 1e-9);
  CHECK(t1.max_linear_residual < 1e-8);
  CHECK(t1.phi == t2.phi);
  CHECK(t1.nodes == t2.nodes);
  bool same_grad = t1.grad.size() == t2.grad.size();
  for (std::size_t i = 0; same_grad && i < t1.grad.size(); ++i)
    same_grad = t1.grad[i] == t2.grad[i];
  CHECK(same_grad);
}

}  // TEST_SUITE
