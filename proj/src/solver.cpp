#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include <Eigen/Geometry>

#include "efg/errors.hpp"
#include "efg/solver.hpp"
#include "efg/vtk.hpp"

namespace efg {
namespace fs = std::filesystem;

double ramp_fraction(double t, double duration)
{
  if (t <= 0.0)
    return 0.0;
  if (t >= duration)
    return 1.0;
  const double s = t / duration;
  return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double smooth_ramp(double t, double duration, double u_max)
{
  return u_max * ramp_fraction(t, duration);
}

double critical_time_step(double min_spacing, const MaterialTable& materials, double safety)
{
  double c = 0.0;
  for (const auto& [region, m] : materials.regions())
    c = std::max(c, m.wave_speed());
  if (!(c > 0.0))
    throw ConfigError("no material defined");
  return safety * min_spacing / c;
}

double critical_time_step(const NeighborIndex& index, const MaterialTable& materials, double safety)
{
  double h = std::numeric_limits<double>::infinity();
  for (NodeId i = 0; i < index.cloud().size(); ++i)
    h = std::min(h, index.nearest_distance(i));
  return critical_time_step(h, materials, safety);
}

Vec3 BoundaryCondition::displacement(const Vec3& x, double t) const
{
  return std::visit(
      [&](const auto& p) -> Vec3 {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, Fixed>) {
          return Vec3::Zero();
        } else if constexpr (std::is_same_v<P, Ramp>) {
          return p.u_max * ramp_fraction(t, p.duration.value());
        } else {
          const double theta = p.angle * ramp_fraction(t, p.duration.value());
          const Vec3 d = x - p.center;
          return Eigen::AngleAxisd(theta, p.axis.normalized()) * d - d;
        }
      },
      program);
}

double BoundaryCondition::load_duration() const
{
  return std::visit(
      [&](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, Fixed>)
          return 0.0;
        else {
          if (!p.duration)
            throw ConfigError("boundary condition '" + set_name + "' has no ramp duration");
          return *p.duration;
        }
      },
      program);
}

void BoundaryCondition::resolve_duration(double default_duration)
{
  std::visit(
      [&](auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (!std::is_same_v<P, Fixed>) {
          if (!p.duration)
            p.duration = default_duration;
          if (!(*p.duration > 0.0))
            throw ConfigError("boundary condition '" + set_name + "' needs a positive ramp duration");
        }
      },
      program);
}

SimState SimState::at_rest(std::vector<double> mass, double dt, double damping)
{
  SimState s;
  const std::size_t n = mass.size();
  s.mass = std::move(mass);
  s.u_prev.assign(n, Vec3::Zero());
  s.u_curr.assign(n, Vec3::Zero());
  s.u_next.assign(n, Vec3::Zero());
  s.f_ext.assign(n, Vec3::Zero());
  s.f_int.assign(n, Vec3::Zero());
  s.dt = dt;
  s.damping = damping;
  return s;
}

void step(SimState& s, ForceAssembler& forces, const NodeCloud& cloud,
          std::span<const BoundaryCondition> bcs, StepMode mode)
{
  const std::size_t n = s.mass.size();
  forces.assemble(s.u_curr, s.f_int, s.step);

  if (mode == StepMode::central_difference) {
    const double dt2 = s.dt * s.dt;
    for (std::size_t i = 0; i < n; ++i)
      s.u_next[i] = s.u_curr[i] + (s.u_curr[i] - s.u_prev[i]) +
                    dt2 * ((s.f_ext[i] - s.f_int[i]) / s.mass[i]);
  } else {
    const double a = s.alpha();
    const double b = s.beta();
    for (std::size_t i = 0; i < n; ++i)
      s.u_next[i] = s.u_curr[i] + b * (s.u_curr[i] - s.u_prev[i]) +
                    a * ((s.f_ext[i] - s.f_int[i]) / s.mass[i]);
  }

  const double t_next = static_cast<double>(s.step + 1) * s.dt;
  for (const auto& bc : bcs)
    for (NodeId id : bc.nodes) {
      const Vec3 target = bc.displacement(cloud.coords[id], t_next);
      for (int k = 0; k < 3; ++k)
        if (bc.mask[static_cast<std::size_t>(k)])
          s.u_next[id][k] = target[k];
    }

  for (std::size_t i = 0; i < n; ++i)
    if (!s.u_next[i].allFinite())
      throw DivergenceError(s.step);

  std::swap(s.u_prev, s.u_curr);
  std::swap(s.u_curr, s.u_next);
  ++s.step;
  s.time = t_next;
}

const char* to_string(RunStatus s)
{
  switch (s) {
  case RunStatus::converged: return "converged";
  case RunStatus::not_converged: return "not_converged";
  case RunStatus::diverged: return "diverged";
  case RunStatus::inverted: return "inverted";
  }
  return "unknown";
}

void bind_boundary_conditions(const NodeCloud& cloud, std::vector<BoundaryCondition>& bcs)
{
  for (auto& bc : bcs) {
    if (bc.nodes.empty())
      bc.nodes = cloud.set(bc.set_name);
    for (NodeId id : bc.nodes)
      if (id >= cloud.size())
        throw ConfigError("boundary condition '" + bc.set_name + "' references node " +
                          std::to_string(id) + " out of range");
  }
}

namespace {

// default step as a fraction of the linearised stability limit 2 / omega_max
constexpr double kStableFraction = 0.8;

void write_series(const fs::path& path, const std::vector<SeriesRow>& rows)
{
  std::ofstream out(path);
  if (!out)
    throw DataError("cannot write " + path.string());
  out << "step,time,kinetic,max_increment\n" << std::setprecision(10);
  for (const auto& r : rows)
    out << r.step << ',' << r.time << ',' << r.kinetic << ',' << r.max_increment << '\n';
}

std::string snapshot_name(const std::string& prefix, long step)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%08ld.vtk", step);
  return prefix + buf;
}

}  // namespace

RunResult run(const Problem& problem, const RunOptions& options)
{
  const auto t0 = std::chrono::steady_clock::now();
  const Model& model = problem.model;
  model.cloud.validate();
  model.grid.validate();
  const SolverSettings& cfg = problem.solver;
  if (!(cfg.safety > 0.0))
    throw ConfigError("solver.safety must be positive");
  if (!(cfg.dt_factor > 0.0))
    throw ConfigError("solver.dt_factor must be positive");
  if (!(cfg.tol_u > 0.0))
    throw ConfigError("solver.tol_u must be positive");
  if (cfg.max_steps <= 0)
    throw ConfigError("solver.max_steps must be positive");

  RunResult r;
  const NeighborIndex index(model.cloud);
  r.table = precompute(index, model.grid, problem.approx);
  ForceAssembler forces(r.table, problem.materials, options.force);
  auto mass = lump_mass(r.table, problem.materials);

  std::vector<BoundaryCondition> bcs = problem.bcs;
  bind_boundary_conditions(model.cloud, bcs);
  std::vector<std::array<bool, 3>> constrained(model.cloud.size(), {false, false, false});
  for (const auto& bc : bcs)
    for (NodeId id : bc.nodes)
      for (std::size_t k = 0; k < 3; ++k)
        constrained[id][k] = constrained[id][k] || bc.mask[k];

  r.spectrum = estimate_spectrum(forces, mass, constrained, index.diameter());
  r.critical_dt = critical_time_step(index, problem.materials, cfg.safety);
  if (r.spectrum.omega_max > 0.0)
    r.critical_dt = std::min(r.critical_dt, kStableFraction * 2.0 / r.spectrum.omega_max);
  r.dt = cfg.dt.value_or(cfg.dt_factor * r.critical_dt);
  if (!(r.dt > 0.0))
    throw ConfigError("solver.dt must be positive");
  if (r.spectrum.omega_max > 0.0 && r.dt > 2.0 / r.spectrum.omega_max)
    std::cerr << "warning: time step " << r.dt << " s exceeds the stability estimate "
              << 2.0 / r.spectrum.omega_max << " s\n";
  r.load_time = cfg.load_time.value_or(cfg.load_steps * r.critical_dt);
  double load_end = 0.0;
  for (auto& bc : bcs) {
    bc.resolve_duration(r.load_time);
    load_end = std::max(load_end, bc.load_duration());
  }

  r.damping = cfg.damping.value_or(cfg.mode == StepMode::dynamic_relaxation ? 2.0 * r.spectrum.omega_min : 0.0);
  if (r.damping < 0.0)
    throw ConfigError("solver.damping must be non-negative");
  if (options.verbose)
    std::cerr << "nodes " << model.cloud.size() << ", gauss points " << r.table.points()
              << ", dt " << r.dt << " s, load time " << load_end << " s, damping " << r.damping
              << " 1/s (omega " << r.spectrum.omega_min << " .. " << r.spectrum.omega_max << ")\n";

  r.state = SimState::at_rest(std::move(mass), r.dt, r.damping);
  SimState& s = r.state;
  const bool files = !problem.output.dir.empty();
  if (files) {
    std::error_code ec;
    fs::create_directories(problem.output.dir, ec);
    if (ec)
      throw DataError("cannot create " + problem.output.dir.string() + ": " + ec.message());
  }

  int quiet = 0;
  try {
    while (s.step < cfg.max_steps) {
      step(s, forces, model.cloud, bcs, cfg.mode);
      double inc = 0.0, kin = 0.0;
      for (std::size_t i = 0; i < s.mass.size(); ++i) {
        const double d2 = (s.u_curr[i] - s.u_prev[i]).squaredNorm();
        inc = std::max(inc, d2);
        kin += s.mass[i] * d2;
      }
      inc = std::sqrt(inc);
      kin /= s.dt * s.dt;
      const bool loaded = s.time >= load_end;
      quiet = (loaded && inc < cfg.tol_u) ? quiet + 1 : 0;
      const bool done = quiet >= cfg.settle_steps;
      if (problem.output.summary_every > 0 && (s.step % problem.output.summary_every == 0 || done))
        r.series.push_back({s.step, s.time, kin, inc});
      if (files && problem.output.vtk_every > 0 && s.step % problem.output.vtk_every == 0)
        write_vtk(problem.output.dir / snapshot_name(problem.output.prefix, s.step), model, s.u_curr);
      if (options.verbose && s.step % 1000 == 0)
        std::cerr << "step " << s.step << " t " << s.time << " max increment " << inc << '\n';
      if (done) {
        r.status = RunStatus::converged;
        break;
      }
    }
    if (r.status != RunStatus::converged)
      r.message = "step budget of " + std::to_string(cfg.max_steps) + " exhausted";
  } catch (const InversionError& e) {
    r.status = RunStatus::inverted;
    r.message = e.what();
  } catch (const DivergenceError& e) {
    r.status = RunStatus::diverged;
    r.message = e.what();
  }

  r.min_jacobian = min_jacobian(r.table, s.u_curr);
  if (files) {
    write_series(problem.output.dir / (problem.output.prefix + "_summary.csv"), r.series);
    write_vtk(problem.output.dir / (problem.output.prefix + "_final.vtk"), model, s.u_curr);
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace efg
