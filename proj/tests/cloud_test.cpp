#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "efg/cloud.hpp"
#include "efg/errors.hpp"
#include "test_util.hpp"

using namespace efg;

namespace {

double factorial(int n)
{
  double f = 1.0;
  for (int k = 2; k <= n; ++k)
    f *= k;
  return f;
}

IntegrationGrid reference_tet()
{
  IntegrationGrid g;
  g.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  g.cells = {{0, 1, 2, 3}};
  g.region = {0};
  return g;
}

}  // namespace

TEST_SUITE("cloud") {

TEST_CASE("cube grid counts")
{
  const Model m = generate_cube_grid(0.1, 6);
  CHECK(m.cloud.size() == 216);
  CHECK(m.grid.size() == 750);
  CHECK(m.grid.total_volume() == doctest::Approx(1e-3).epsilon(1e-12));
  for (const char* s : {"bottom", "top", "xmin", "xmax", "ymin", "ymax"})
    CHECK(m.cloud.set(s).size() == 36);

  const Model tiny = generate_cube_grid(0.1, 2);
  CHECK(tiny.cloud.size() == 8);
  CHECK(tiny.grid.size() == 6);
}

TEST_CASE("large cube grid counts")
{
  const Model m = generate_cube_grid(0.1, 41);
  CHECK(m.cloud.size() == 68921);
  CHECK(m.grid.size() == 384000);
}

TEST_CASE("cube grid cells are positively oriented")
{
  const Model m = generate_cube_grid(0.1, 4);
  for (std::size_t c = 0; c < m.grid.size(); ++c)
    CHECK(m.grid.cell_volume(c) > 0.0);
}

TEST_CASE("cylinder grid counts and volume")
{
  const Model coarse = generate_cylinder_grid(0.1, 0.1, 0.00822);
  CHECK(std::abs(static_cast<double>(coarse.cloud.size()) - 1089.0) <= 0.3 * 1089.0);
  const Model fine = generate_cylinder_grid(0.1, 0.1, 0.00444);
  CHECK(std::abs(static_cast<double>(fine.cloud.size()) - 7769.0) <= 0.3 * 7769.0);

  for (const Model* m : {&coarse, &fine}) {
    const double exact = std::numbers::pi * 0.05 * 0.05 * 0.1;
    CHECK(std::abs(m->grid.total_volume() - exact) <= 0.02 * exact);
    for (std::size_t c = 0; c < m->grid.size(); ++c)
      REQUIRE(m->grid.cell_volume(c) > 0.0);
    CHECK_FALSE(m->cloud.set("bottom").empty());
    CHECK(m->cloud.set("bottom").size() == m->cloud.set("top").size());
  }
}

TEST_CASE("cylinder has a node layer at mid-height")
{
  const Model m = generate_cylinder_grid(0.1, 0.1, 0.00822);
  const auto n = std::count_if(m.cloud.coords.begin(), m.cloud.coords.end(),
                               [](const Vec3& p) { return std::abs(p.z() - 0.05) < 1e-12; });
  CHECK(static_cast<std::size_t>(n) == m.cloud.set("top").size());
}

TEST_CASE("save and load round trip")
{
  test::TempDir dir("roundtrip");
  const Model m = generate_cube_grid(0.1, 6);
  save_model(m, dir.path());
  const Model back = load_model(dir.path());
  REQUIRE(back.cloud.size() == m.cloud.size());
  REQUIRE(back.grid.size() == m.grid.size());
  for (std::size_t i = 0; i < m.cloud.size(); ++i)
    CHECK(back.cloud.coords[i] == m.cloud.coords[i]);
  for (std::size_t c = 0; c < m.grid.size(); ++c)
    CHECK(back.grid.cells[c] == m.grid.cells[c]);
  CHECK(back.cloud.node_sets == m.cloud.node_sets);
}

TEST_CASE("negative cell is repaired on load")
{
  test::TempDir dir("orient");
  {
    std::ofstream n(dir / "nodes.txt");
    n << "0 0 0\n1 0 0\n0 1 0\n0 0 1\n";
    std::ofstream c(dir / "cells.txt");
    c << "# one tet, wrong orientation\n0 2 1 3\n";
  }
  const Model m = load_grid(dir / "nodes.txt", dir / "cells.txt");
  REQUIRE(m.grid.size() == 1);
  CHECK(m.grid.cell_volume(0) == doctest::Approx(1.0 / 6.0));
  auto ids = m.grid.cells[0];
  std::sort(ids.begin(), ids.end());
  CHECK(ids == std::array<NodeId, 4>{0, 1, 2, 3});
}

TEST_CASE("non-finite coordinate is a data error")
{
  test::TempDir dir("nan");
  {
    std::ofstream n(dir / "nodes.txt");
    n << "0 0 0\nnan 0 0\n";
  }
  CHECK_THROWS_AS(read_nodes_file(dir / "nodes.txt"), DataError);
}

TEST_CASE("malformed node line reports its line number")
{
  test::TempDir dir("parse");
  {
    std::ofstream n(dir / "nodes.txt");
    n << "0 0 0\n1 2\n";
  }
  try {
    read_nodes_file(dir / "nodes.txt");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("degenerate cell is rejected")
{
  test::TempDir dir("flat");
  {
    std::ofstream n(dir / "nodes.txt");
    n << "0 0 0\n1 0 0\n0 1 0\n1 1 0\n";
    std::ofstream c(dir / "cells.txt");
    c << "0 1 2 3\n";
  }
  CHECK_THROWS_AS(load_grid(dir / "nodes.txt", dir / "cells.txt"), DataError);
}

TEST_CASE("quadrature weights sum to the tet volume")
{
  const auto gp = gauss_points(reference_tet());
  REQUIRE(gp.size() == 4);
  double w = 0.0;
  for (const auto& g : gp)
    w += g.weight;
  CHECK(w == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("quadrature integrates monomials up to degree two exactly")
{
  const auto gp = gauss_points(reference_tet());
  for (int a = 0; a <= 2; ++a)
    for (int b = 0; a + b <= 2; ++b)
      for (int c = 0; a + b + c <= 2; ++c) {
        double q = 0.0;
        for (const auto& g : gp)
          q += g.weight * std::pow(g.position.x(), a) * std::pow(g.position.y(), b) *
               std::pow(g.position.z(), c);
        const double exact = factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3);
        CAPTURE(a);
        CAPTURE(b);
        CAPTURE(c);
        CHECK(q == doctest::Approx(exact).epsilon(1e-13));
      }
  double x2 = 0.0;
  for (const auto& g : gp)
    x2 += g.weight * g.position.x() * g.position.x();
  CHECK(x2 == doctest::Approx(1.0 / 60.0).epsilon(1e-13));
}

TEST_CASE("quadrature over the cube grid")
{
  const Model m = generate_cube_grid(0.1, 6);
  const auto gp = gauss_points(m.grid);
  CHECK(gp.size() == 3000);
  double v = 0.0;
  for (const auto& g : gp)
    v += g.weight;
  CHECK(v == doctest::Approx(1e-3).epsilon(1e-12));
}

TEST_CASE("radius queries match a brute-force scan")
{
  const Model m = generate_cube_grid(0.1, 6);
  const NeighborIndex index(m.cloud);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(-0.01, 0.11), rad(0.005, 0.06);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 x(pos(rng), pos(rng), pos(rng));
    const double r = rad(rng);
    std::vector<NodeId> brute;
    for (NodeId i = 0; i < m.cloud.size(); ++i)
      if ((m.cloud.coords[i] - x).norm() <= r)
        brute.push_back(i);
    CHECK(index.within(x, r) == brute);

    NodeId best = 0;
    for (NodeId i = 1; i < m.cloud.size(); ++i)
      if ((m.cloud.coords[i] - x).norm() < (m.cloud.coords[best] - x).norm())
        best = i;
    CHECK((m.cloud.coords[index.nearest(x)] - x).norm() == doctest::Approx((m.cloud.coords[best] - x).norm()));
  }
}

TEST_CASE("support postconditions in the interior and at a corner")
{
  const Model m = generate_cube_grid(0.1, 6);
  const NeighborIndex index(m.cloud);
  const double h = 0.02;
  for (const Vec3& x : {Vec3(0.05, 0.05, 0.05), Vec3(0.0, 0.0, 0.0)}) {
    const auto s = find_support(x, index, 10, 1.5 * h);
    CHECK(s.nodes.size() >= 10);
    CHECK(std::is_sorted(s.nodes.begin(), s.nodes.end()));
    for (NodeId id : s.nodes)
      CHECK((m.cloud.coords[id] - x).norm() < s.radius);
  }
}

TEST_CASE("node spacing on a regular lattice")
{
  const Model m = generate_cube_grid(0.1, 6);
  const NeighborIndex index(m.cloud);
  CHECK(index.nearest_distance(0) == doctest::Approx(0.02));
  CHECK(average_spacing(m) == doctest::Approx(std::cbrt(1e-3 / 216.0)));
}

}  // TEST_SUITE
