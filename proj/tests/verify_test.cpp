#include <doctest.h>

#include <cmath>
#include <sstream>

#include "efg/errors.hpp"
#include "efg/verify.hpp"
#include "efg/vtk.hpp"

using namespace efg;

namespace {

const MaterialParams kSoft = MaterialParams::from(3000.0, 0.49, 1000.0);

}  // namespace

TEST_SUITE("verify") {

TEST_CASE("uniaxial root at zero strain")
{
  const auto s = solve_uniaxial_J(1.0, kSoft);
  CHECK(s.jacobian == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.lateral == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("uniaxial root agrees with an exhaustive scan")
{
  const double lam = 0.8;
  const double mu = kSoft.shear_modulus(), kappa = kSoft.bulk_modulus();
  auto g = [&](double j) {
    return mu / 6.0 * (j / lam - lam * lam) + 0.5 * kappa * (std::pow(j, 8.0 / 3.0) - std::pow(j, 5.0 / 3.0));
  };
  double root = std::nan("");
  double prev = g(0.9);
  for (long k = 1; k <= 2'000'000; ++k) {
    const double j = 0.9 + 1e-7 * static_cast<double>(k);
    const double cur = g(j);
    if ((prev < 0.0) != (cur < 0.0)) {
      root = j - 0.5e-7;
      break;
    }
    prev = cur;
  }
  REQUIRE(std::isfinite(root));
  const auto s = solve_uniaxial_J(lam, kSoft);
  CHECK(std::abs(s.jacobian - root) < 1e-6);
  CHECK(std::abs(uniaxial_residual(lam, s.jacobian, kSoft)) < 1e-14 * mu);
  CHECK(s.lateral == doctest::Approx(std::sqrt(s.jacobian / lam)));
}

TEST_CASE("volume ratio tends to one in the incompressible limit")
{
  double last = 0.0;
  for (double nu : {0.3, 0.45, 0.49, 0.499, 0.4999, 0.49999, 0.499999}) {
    const auto s = solve_uniaxial_J(0.8, MaterialParams::from(3000.0, nu, 1000.0));
    const double gap = std::abs(s.jacobian - 1.0);
    if (last > 0.0)
      CHECK(gap < last);
    last = gap;
  }
  CHECK(last < 1e-5);
}

TEST_CASE("analytical cube field")
{
  const auto s = solve_uniaxial_J(0.8, kSoft);
  const Vec3 anchor(0.05, 0.05, 0.0);
  CHECK(analytical_cube_displacement(Vec3(0.05, 0.05, 0.0), s, anchor).norm() == 0.0);
  const Vec3 top = analytical_cube_displacement(Vec3(0.02, 0.07, 0.1), s, anchor);
  CHECK(top.z() == doctest::Approx(-0.02).epsilon(1e-12));
  const Vec3 a = analytical_cube_displacement(Vec3(0.05 + 0.03, 0.05 - 0.01, 0.04), s, anchor);
  const Vec3 b = analytical_cube_displacement(Vec3(0.05 - 0.03, 0.05 + 0.01, 0.04), s, anchor);
  CHECK(a.x() == doctest::Approx(-b.x()));
  CHECK(a.y() == doctest::Approx(-b.y()));
  CHECK(a.z() == doctest::Approx(b.z()));
  CHECK(a.x() == doctest::Approx((s.lateral - 1.0) * 0.03));
}

TEST_CASE("error norms")
{
  std::vector<Vec3> ref(101), num(101);
  for (int i = 0; i <= 100; ++i) {
    ref[i] = Vec3::Constant(0.01 * i);
    num[i] = ref[i];
  }
  auto zero = error_norms(num, ref);
  for (int k = 0; k < 3; ++k) {
    CHECK(zero.linf[k] == 0.0);
    CHECK(zero.nrmse[k] == 0.0);
  }
  for (auto& v : num)
    v += Vec3::Constant(1e-4);
  const auto e = error_norms(num, ref);
  CHECK(e.nodes == 101);
  for (int k = 0; k < 3; ++k) {
    CHECK(e.linf[k] == doctest::Approx(1e-4));
    CHECK(e.nrmse[k] == doctest::Approx(1e-4));
    CHECK(e.normalized[k]);
  }

  std::vector<Vec3> flat(4, Vec3::Zero()), off(4, Vec3::Constant(2e-3));
  const auto f = error_norms(off, flat);
  CHECK_FALSE(f.normalized[0]);
  CHECK(f.nrmse[0] == doctest::Approx(2e-3));
  CHECK_THROWS(error_norms(off, std::vector<Vec3>(3)));
}

TEST_CASE("mid-plane check")
{
  const Model m = generate_cylinder_grid(0.1, 0.1, 0.01);
  std::vector<Vec3> u(m.cloud.size(), Vec3::Zero());
  const auto zero = midplane_check(m.cloud, u, 0.1, 0.0, 1e-3);
  CHECK(zero.deviation == 0.0);
  CHECK(zero.nodes > 0);

  for (std::size_t i = 0; i < u.size(); ++i)
    u[i].z() = -0.2 * m.cloud.coords[i].z();
  const auto c = midplane_check(m.cloud, u, 0.1, -0.02, 1e-3);
  CHECK(c.deviation < 1e-15);
  const auto e = midplane_check(m.cloud, u, 0.1, 0.1, 1e-3);
  CHECK(e.deviation == doctest::Approx(0.06));
  CHECK_THROWS_AS(midplane_check(m.cloud, u, 0.1, -0.02, -1.0), DataError);
}

TEST_CASE("boundary audit of an interpolated field")
{
  const Model m = generate_cube_grid(0.1, 6);
  const NeighborIndex index(m.cloud);
  std::vector<Vec3> u(m.cloud.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Vec3& x = m.cloud.coords[i];
    u[i] = Vec3(0.1 * x.x() * x.z(), -0.05 * x.y(), 0.3 * x.z() * x.z());
  }
  const std::vector<std::string> sets{"bottom", "top"};
  const auto audit = bc_audit(index, u, sets, ApproxSettings{});
  REQUIRE(audit.size() == 2);
  for (const auto& a : audit) {
    CHECK(a.nodes == 36);
    CHECK(a.linf < 1e-9);
    CHECK(a.l2 < 1e-10);
  }
}

TEST_CASE("boundary audit of a self-supported node is exact")
{
  NodeCloud cloud;
  for (int i = 0; i < 6; ++i)
    cloud.coords.emplace_back(1.0 * i, 0.5 * (i % 2), 0.0);
  const NeighborIndex index(cloud);
  ApproxSettings a;
  a.support.n_min = 1;
  a.support.radius_factor = 0.1;
  std::vector<Vec3> u(cloud.size(), Vec3(0.3, -0.2, 0.1));
  u[2] = Vec3(1.0, 2.0, 3.0);
  const std::vector<NodeId> ids{2};
  const auto e = bc_audit_nodes(index, u, "single", ids, a);
  CHECK(e.linf == 0.0);
  CHECK(e.l2 == 0.0);
}

TEST_CASE("report csv layout")
{
  std::ostringstream out;
  const std::vector<ReportRow> rows{{"cube-compression", "level 1", "x", "linf", 1.5e-4}};
  write_report_csv(out, rows);
  CHECK(out.str().rfind("benchmark,grid,component,metric,value\n", 0) == 0);
  CHECK(out.str().find("cube-compression,level 1,x,linf,0.00015") != std::string::npos);
}

TEST_CASE("vtk output")
{
  const Model m = generate_cube_grid(0.1, 3);
  std::vector<Vec3> u(m.cloud.size(), Vec3(0.0, 0.0, -0.001));
  std::ostringstream out;
  write_vtk(out, m, u, "cube");
  const std::string s = out.str();
  CHECK(s.rfind("# vtk DataFile Version", 0) == 0);
  CHECK(s.find("DATASET UNSTRUCTURED_GRID") != std::string::npos);
  CHECK(s.find("POINTS 27 double") != std::string::npos);
  CHECK(s.find("CELLS 48 240") != std::string::npos);
  CHECK(s.find("CELL_TYPES 48") != std::string::npos);
  CHECK(s.find("POINT_DATA 27") != std::string::npos);
  CHECK(s.find("VECTORS displacement double") != std::string::npos);

  Model loose = m;
  loose.grid.vertices_are_nodes = false;
  std::ostringstream out2;
  write_vtk(out2, loose, u);
  CHECK(out2.str().find("CELLS 27 54") != std::string::npos);
  CHECK_THROWS(write_vtk(out2, m, std::vector<Vec3>(3)));
}

}  // TEST_SUITE
