#include <array>

#include "efg/config.hpp"
#include "efg/errors.hpp"

namespace efg {
using nlohmann::json;

namespace {

constexpr double kYoungs = 3000.0;
constexpr double kPoisson = 0.49;
constexpr double kDensity = 1000.0;

json material(double nu)
{
  return json::array({{{"region", 0}, {"E", kYoungs}, {"nu", nu}, {"rho", kDensity}}});
}

json fixed(const std::string& set, std::array<bool, 3> mask = {true, true, true})
{
  return {{"set", set}, {"mask", mask}, {"program", "fixed"}};
}

json ramp(const std::string& set, std::array<double, 3> u_max, std::array<bool, 3> mask = {true, true, true})
{
  return {{"set", set}, {"mask", mask}, {"program", "ramp"}, {"u_max", u_max}};
}

template <std::size_t N>
double pick(const std::array<double, N>& values, int level, const std::string& name)
{
  if (level < 1 || level > static_cast<int>(N))
    throw ConfigError("preset " + name + " has levels 1.." + std::to_string(N));
  return values[static_cast<std::size_t>(level - 1)];
}

// support settings shared by the cylinder presets
json cylinder_approx(int n_min = 10)
{
  return {{"radius_factor", 2.0}, {"n_min", n_min}};
}

json cylinder_geometry(int level, const std::string& name)
{
  const std::array<double, 3> spacing{0.00822, 0.00444, 0.00265};
  return {{"type", "cylinder"}, {"height", 0.1}, {"diameter", 0.1}, {"spacing", pick(spacing, level, name)}};
}

}  // namespace

const std::vector<std::string>& preset_names()
{
  static const std::vector<std::string> names{"cube-compression",   "cylinder-compression",
                                              "cylinder-extension", "cylinder-shear",
                                              "cube-torsion",       "cylinder-indentation"};
  return names;
}

json preset_config(const std::string& name, const PresetOptions& opt)
{
  const double nu = opt.poisson.value_or(kPoisson);
  json c;
  c["benchmark"] = name;
  c["materials"] = material(nu);

  if (name == "cube-compression") {
    const std::array<double, 4> n{6, 11, 21, 41};
    c["geometry"] = {{"type", "cube"}, {"edge", 0.1}, {"nodes_per_edge", static_cast<int>(pick(n, opt.level, name))}};
    c["bcs"] = json::array({fixed("bottom", {false, false, true}), fixed("xmin", {true, false, false}),
                            fixed("ymin", {false, true, false}),
                            ramp("top", {0.0, 0.0, -0.02}, {false, false, true})});
  } else if (name == "cylinder-compression") {
    c["geometry"] = cylinder_geometry(opt.level, name);
    c["approx"] = cylinder_approx();
    c["bcs"] = json::array({fixed("bottom"), ramp("top", {0.0, 0.0, -0.02})});
  } else if (name == "cylinder-extension") {
    c["geometry"] = cylinder_geometry(opt.level, name);
    c["approx"] = cylinder_approx();
    c["bcs"] = json::array({fixed("bottom"), ramp("top", {0.0, 0.0, 0.1})});
    c["solver"] = {{"load_time", 1.0}};
  } else if (name == "cylinder-shear") {
    c["geometry"] = cylinder_geometry(opt.level, name);
    c["approx"] = cylinder_approx();
    c["bcs"] = json::array({fixed("bottom"), ramp("top", {0.05, 0.0, 0.0})});
  } else if (name == "cube-torsion") {
    const std::array<double, 2> n{16, 26};
    c["geometry"] = {{"type", "cube"}, {"edge", 1.0}, {"nodes_per_edge", static_cast<int>(pick(n, opt.level, name))}};
    c["bcs"] = json::array({fixed("xmin"),
                            {{"set", "xmax"},
                             {"mask", {true, true, true}},
                             {"program", "torsion"},
                             {"axis", {1.0, 0.0, 0.0}},
                             {"center", {1.0, 0.5, 0.5}},
                             {"angle_deg", 30.0}}});
  } else if (name == "cylinder-indentation") {
    const double height = 0.017, diameter = 0.030;
    const std::array<double, 4> spacing{0.00155, 0.00109, 0.00064, 0.00054};
    const double depth = opt.depth.value_or(0.012);
    c["approx"] = cylinder_approx(30);
    c["geometry"] = {{"type", "cylinder"}, {"height", height}, {"diameter", diameter},
                     {"spacing", pick(spacing, opt.level, name)}};
    json indenter = ramp("top", {0.0, 0.0, -depth});
    indenter["footprint"] = {{"center", {0.0, 0.0, height}}, {"radius", 0.25 * diameter}};
    c["bcs"] = json::array({fixed("bottom"), indenter});
    c["solver"] = {{"dt_factor", 0.25}, {"load_time", 0.1}};
  } else {
    std::string list;
    for (const auto& n : preset_names())
      list += (list.empty() ? "" : ", ") + n;
    throw ConfigError("unknown benchmark '" + name + "'; available: " + list);
  }
  return c;
}

}  // namespace efg
