#include "efg/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "efg/errors.hpp"

namespace efg {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key)
{
  return path.empty() ? key : path + "." + key;
}

std::string index_path(const std::string& path, std::size_t i)
{
  return path + "[" + std::to_string(i) + "]";
}

[[noreturn]] void fail(const std::string& path, const std::string& what)
{
  throw ConfigError(path + ": " + what);
}

/// Field access that tracks the JSON path.
class Node {
public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path))
  {
    if (!j_.is_object())
      fail(path_.empty() ? "config" : path_, "expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const
  {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!ok.count(it.key()))
        fail(join(path_, it.key()), "unknown field");
  }

  void require(std::initializer_list<const char*> keys) const
  {
    std::string missing;
    for (const char* k : keys)
      if (!j_.contains(k))
        missing += (missing.empty() ? "" : ", ") + join(path_, k);
    if (!missing.empty())
      throw ConfigError("missing required field(s): " + missing);
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& raw(const char* key) const { return j_.at(key); }
  std::string path(const char* key) const { return join(path_, key); }

  double number(const char* key) const
  {
    const json& v = at(key);
    if (!v.is_number())
      fail(path(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d))
      fail(path(key), "expected a finite number");
    return d;
  }
  double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }
  std::optional<double> opt_number(const char* key) const
  {
    return has(key) ? std::optional<double>(number(key)) : std::nullopt;
  }
  double positive(const char* key) const
  {
    const double d = number(key);
    if (!(d > 0.0))
      fail(path(key), "must be positive");
    return d;
  }
  long integer(const char* key) const
  {
    const json& v = at(key);
    if (!v.is_number_integer())
      fail(path(key), "expected an integer");
    return v.get<long>();
  }
  long integer(const char* key, long fallback) const { return has(key) ? integer(key) : fallback; }
  std::string string(const char* key) const
  {
    const json& v = at(key);
    if (!v.is_string())
      fail(path(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const char* key, const std::string& fallback) const
  {
    return has(key) ? string(key) : fallback;
  }
  Vec3 vec3(const char* key) const
  {
    const json& v = at(key);
    if (!v.is_array() || v.size() != 3)
      fail(path(key), "expected an array of 3 numbers");
    Vec3 out;
    for (std::size_t k = 0; k < 3; ++k) {
      if (!v[k].is_number())
        fail(index_path(path(key), k), "expected a number");
      out[static_cast<Eigen::Index>(k)] = v[k].get<double>();
    }
    if (!out.allFinite())
      fail(path(key), "expected finite numbers");
    return out;
  }
  std::array<bool, 3> mask(const char* key) const
  {
    if (!has(key))
      return {true, true, true};
    const json& v = at(key);
    if (!v.is_array() || v.size() != 3)
      fail(path(key), "expected an array of 3 booleans");
    std::array<bool, 3> out{};
    for (std::size_t k = 0; k < 3; ++k) {
      if (!v[k].is_boolean())
        fail(index_path(path(key), k), "expected a boolean");
      out[k] = v[k].get<bool>();
    }
    return out;
  }

private:
  const json& at(const char* key) const
  {
    if (!j_.contains(key))
      fail(path(key), "missing");
    return j_.at(key);
  }

  const json& j_;
  std::string path_;
};

fs::path resolve(const fs::path& base, const std::string& p)
{
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

ApproxSettings parse_approx(const Node& n)
{
  n.allow({"basis", "weight", "epsilon", "shape_ratio", "mu_scale", "n_min", "radius_factor"});
  ApproxSettings a;
  const std::string basis = n.string("basis", "quadratic");
  if (basis == "quadratic")
    a.params.basis = BasisKind::quadratic;
  else if (basis == "linear")
    a.params.basis = BasisKind::linear;
  else
    fail(n.path("basis"), "expected \"quadratic\" or \"linear\"");
  const std::string weight = n.string("weight", "regularized");
  if (weight == "regularized")
    a.params.weight.kind = WeightSpec::Kind::regularized;
  else if (weight == "exponential")
    a.params.weight.kind = WeightSpec::Kind::exponential;
  else
    fail(n.path("weight"), "expected \"regularized\" or \"exponential\"");
  a.params.weight.epsilon = n.number("epsilon", 1e-5);
  if (!(a.params.weight.epsilon > 0.0 && a.params.weight.epsilon < 1.0))
    fail(n.path("epsilon"), "must lie in (0, 1)");
  a.params.weight.shape_ratio = n.number("shape_ratio", 3.0);
  if (!(a.params.weight.shape_ratio > 0.0))
    fail(n.path("shape_ratio"), "must be positive");
  const double mu = n.number("mu_scale", 1e-7);
  if (mu < 0.0)
    fail(n.path("mu_scale"), "must be non-negative");
  a.params.constraints = MmlsConstraints::uniform(mu);
  const long nmin = n.integer("n_min", 10);
  if (nmin < 1)
    fail(n.path("n_min"), "must be at least 1");
  a.support.n_min = static_cast<std::size_t>(nmin);
  a.support.radius_factor = n.number("radius_factor", 1.8);
  if (!(a.support.radius_factor > 0.0))
    fail(n.path("radius_factor"), "must be positive");
  return a;
}

MaterialTable parse_materials(const json& j, const std::string& path)
{
  if (!j.is_array() || j.empty())
    fail(path, "expected a non-empty array");
  MaterialTable table;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Node m(j[i], index_path(path, i));
    m.allow({"region", "E", "nu", "rho"});
    m.require({"E", "nu", "rho"});
    const long region = m.integer("region", 0);
    try {
      table.set(static_cast<int>(region), MaterialParams::from(m.number("E"), m.number("nu"), m.number("rho")));
    } catch (const ConfigError& e) {
      fail(index_path(path, i), e.what());
    }
  }
  return table;
}

std::vector<NodeId> footprint_filter(const Node& b, const NodeCloud& cloud,
                                     const std::vector<NodeId>& ids)
{
  const Node f(b.raw("footprint"), b.path("footprint"));
  f.allow({"center", "radius"});
  f.require({"center", "radius"});
  const Vec3 c = f.vec3("center");
  const double r = f.positive("radius");
  std::vector<NodeId> out;
  for (NodeId id : ids) {
    const Vec3& p = cloud.coords[id];
    if (std::hypot(p.x() - c.x(), p.y() - c.y()) <= r)
      out.push_back(id);
  }
  if (out.empty())
    fail(b.path("footprint"), "selects no nodes");
  return out;
}

std::vector<BoundaryCondition> parse_bcs(const json& j, const std::string& path, const NodeCloud& cloud)
{
  if (!j.is_array())
    fail(path, "expected an array");
  std::vector<BoundaryCondition> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Node b(j[i], index_path(path, i));
    b.allow({"set", "mask", "program", "u_max", "T", "axis", "center", "angle_deg", "footprint"});
    b.require({"set", "program"});
    BoundaryCondition bc;
    bc.set_name = b.string("set");
    if (!cloud.node_sets.count(bc.set_name))
      fail(b.path("set"), "unknown node set '" + bc.set_name + "'");
    bc.nodes = cloud.set(bc.set_name);
    if (b.has("footprint"))
      bc.nodes = footprint_filter(b, cloud, bc.nodes);
    bc.mask = b.mask("mask");
    const std::string program = b.string("program");
    std::optional<double> duration;
    if (b.has("T"))
      duration = b.positive("T");
    if (program == "fixed") {
      bc.program = BoundaryCondition::Fixed{};
    } else if (program == "ramp") {
      b.require({"u_max"});
      bc.program = BoundaryCondition::Ramp{b.vec3("u_max"), duration};
    } else if (program == "torsion") {
      b.require({"axis", "center", "angle_deg"});
      const Vec3 axis = b.vec3("axis");
      if (!(axis.norm() > 0.0))
        fail(b.path("axis"), "must be non-zero");
      bc.program = BoundaryCondition::Torsion{axis, b.vec3("center"),
                                              b.number("angle_deg") * std::numbers::pi / 180.0, duration};
    } else {
      fail(b.path("program"), "expected \"fixed\", \"ramp\" or \"torsion\"");
    }
    out.push_back(std::move(bc));
  }
  return out;
}

SolverSettings parse_solver(const Node& n)
{
  n.allow({"mode", "dt", "safety", "dt_factor", "damping", "load_time", "load_steps", "tol_u", "settle_steps",
           "max_steps"});
  SolverSettings s;
  const std::string mode = n.string("mode", "dynamic_relaxation");
  if (mode == "dynamic_relaxation")
    s.mode = StepMode::dynamic_relaxation;
  else if (mode == "central_difference")
    s.mode = StepMode::central_difference;
  else
    fail(n.path("mode"), "expected \"dynamic_relaxation\" or \"central_difference\"");
  if (n.has("dt"))
    s.dt = n.positive("dt");
  if (n.has("safety"))
    s.safety = n.positive("safety");
  if (n.has("dt_factor"))
    s.dt_factor = n.positive("dt_factor");
  if (n.has("damping")) {
    s.damping = n.number("damping");
    if (*s.damping < 0.0)
      fail(n.path("damping"), "must be non-negative");
  }
  if (n.has("load_time"))
    s.load_time = n.positive("load_time");
  if (n.has("load_steps"))
    s.load_steps = n.positive("load_steps");
  if (n.has("tol_u"))
    s.tol_u = n.positive("tol_u");
  s.settle_steps = static_cast<int>(n.integer("settle_steps", s.settle_steps));
  if (s.settle_steps < 1)
    fail(n.path("settle_steps"), "must be at least 1");
  s.max_steps = n.integer("max_steps", s.max_steps);
  if (s.max_steps < 1)
    fail(n.path("max_steps"), "must be at least 1");
  return s;
}

OutputSettings parse_output(const Node& n, const fs::path& base)
{
  n.allow({"dir", "prefix", "vtk_every", "summary_every"});
  OutputSettings o;
  if (n.has("dir"))
    o.dir = resolve(base, n.string("dir"));
  o.prefix = n.string("prefix", o.prefix);
  o.vtk_every = n.integer("vtk_every", o.vtk_every);
  o.summary_every = n.integer("summary_every", o.summary_every);
  if (o.vtk_every < 0)
    fail(n.path("vtk_every"), "must be non-negative");
  if (o.summary_every < 0)
    fail(n.path("summary_every"), "must be non-negative");
  return o;
}

}  // namespace

Model build_geometry(const json& geometry, const fs::path& base)
{
  const Node g(geometry, "geometry");
  g.require({"type"});
  const std::string type = g.string("type");
  if (type == "cube") {
    g.allow({"type", "edge", "nodes_per_edge"});
    g.require({"edge", "nodes_per_edge"});
    const long n = g.integer("nodes_per_edge");
    if (n < 2)
      fail(g.path("nodes_per_edge"), "must be at least 2");
    return generate_cube_grid(g.positive("edge"), static_cast<int>(n));
  }
  if (type == "cylinder") {
    g.allow({"type", "height", "diameter", "spacing"});
    g.require({"height", "diameter", "spacing"});
    return generate_cylinder_grid(g.positive("height"), g.positive("diameter"), g.positive("spacing"));
  }
  if (type == "files") {
    g.allow({"type", "dir"});
    g.require({"dir"});
    return load_model(resolve(base, g.string("dir")));
  }
  fail(g.path("type"), "expected \"cube\", \"cylinder\" or \"files\"");
}

Problem problem_from_json(const json& config, const fs::path& base)
{
  const Node root(config, "");
  root.require({"geometry", "materials", "bcs"});
  root.allow({"benchmark", "geometry", "approx", "materials", "bcs", "solver", "output"});
  Problem p;
  p.model = build_geometry(config.at("geometry"), base);
  p.materials = parse_materials(config.at("materials"), "materials");
  for (int region : p.model.grid.region)
    if (!p.materials.regions().count(region))
      fail("materials", "no entry for region " + std::to_string(region));
  p.bcs = parse_bcs(config.at("bcs"), "bcs", p.model.cloud);
  p.approx = parse_approx(Node(config.value("approx", json::object()), "approx"));
  p.solver = parse_solver(Node(config.value("solver", json::object()), "solver"));
  p.output = parse_output(Node(config.value("output", json::object()), "output"), base);
  return p;
}

Problem load_problem(const fs::path& file)
{
  std::ifstream in(file);
  if (!in)
    throw ConfigError("cannot open " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  return problem_from_json(j, file.parent_path());
}

}  // namespace efg
