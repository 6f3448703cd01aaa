#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "efg/approx.hpp"
#include "efg/cloud.hpp"
#include "efg/material.hpp"

namespace efg {

struct ApproxSettings {
  ApproxParams params;
  SupportSettings support;
};

/// Shape data at a fixed set of evaluation points, stored row-compressed.
/// Built once from the reference configuration.
struct ShapeTable {
  std::size_t node_count = 0;
  std::vector<std::uint32_t> offsets{0};
  std::vector<NodeId> nodes;
  std::vector<double> phi;
  std::vector<Vec3> grad;  // empty when built without gradients
  std::vector<Vec3> position;
  std::vector<double> weight;
  std::vector<int> region;
  std::vector<double> support_radius;

  // diagnostics
  double max_partition_residual = 0.0;  // max |sum phi - 1|
  double max_linear_residual = 0.0;     // max |sum phi (x_i - x)| / r_SD
  double min_rcond = 1.0;
  std::size_t reduced_basis_points = 0;

  std::size_t points() const noexcept { return weight.size(); }
  std::size_t row_begin(std::size_t p) const { return offsets[p]; }
  std::size_t row_end(std::size_t p) const { return offsets[p + 1]; }
};

/// Shape functions at arbitrary points.
ShapeTable build_shape_table(const NeighborIndex& index, std::span<const Vec3> points,
                             std::span<const double> weights, std::span<const int> regions,
                             const ApproxSettings& settings, bool with_gradient);

/// Shape functions and gradients at every Gauss point of the grid.
ShapeTable precompute(const NeighborIndex& index, const IntegrationGrid& grid,
                      const ApproxSettings& settings);

/// Shape functions (values only) evaluated at the given nodes; row k
/// belongs to nodes[k].
ShapeTable shape_table_at_nodes(const NeighborIndex& index, std::span<const NodeId> nodes,
                                const ApproxSettings& settings);

/// Row-sum lumping m_i = sum_gp rho w phi_i. Throws ConfigError if any
/// m_i <= 0.
std::vector<double> lump_mass(const ShapeTable& table, const MaterialTable& materials);

struct ForceOptions {
  int workers = 1;
  /// Gather per node in Gauss point order: identical bits at any worker count.
  bool deterministic = false;
};

/// Matrix-free internal force assembly f_i = sum_gp w (F S) grad phi_i.
class ForceAssembler {
public:
  ForceAssembler(const ShapeTable& table, const MaterialTable& materials, ForceOptions options = {});

  /// Returns the smallest det F seen. Throws InversionError (with the Gauss
  /// point and step) if any det F <= 0.
  double assemble(std::span<const Vec3> u, std::vector<Vec3>& f_int, long step = -1);

  const ShapeTable& table() const noexcept { return *table_; }

private:
  double point_contribution(std::size_t p, std::span<const Vec3> u, Vec3* out, long step) const;

  const ShapeTable* table_;
  ForceOptions options_;
  std::vector<double> mu_, kappa_;
  // deterministic gather: per-node list of entries into the row storage
  std::vector<std::uint32_t> node_offsets_;
  std::vector<std::uint32_t> node_entries_;
  std::vector<Vec3> entry_force_;
  std::vector<std::vector<Vec3>> thread_buffers_;
};

std::vector<Vec3> internal_forces(const ShapeTable& table, const MaterialTable& materials,
                                  std::span<const Vec3> u, ForceOptions options = {});

double min_jacobian(const ShapeTable& table, std::span<const Vec3> u);

/// 3-4-5 polynomial ramp u_max (10 s^3 - 15 s^4 + 6 s^5), s = t / T, held
/// at u_max for t > T.
double ramp_fraction(double t, double duration);
double smooth_ramp(double t, double duration, double u_max);

/// safety * min_i h_i / c_d with h_i the nearest-neighbour distance and
/// c_d the largest dilatational wave speed over the regions.
double critical_time_step(double min_spacing, const MaterialTable& materials, double safety = 0.5);
double critical_time_step(const NeighborIndex& index, const MaterialTable& materials,
                          double safety = 0.5);

struct BoundaryCondition {
  struct Fixed {};
  struct Ramp {
    Vec3 u_max = Vec3::Zero();
    std::optional<double> duration;  // defaults to the run's load time
  };
  /// Rigid rotation of the node set about axis through center by angle
  /// (rad), following the ramp profile.
  struct Torsion {
    Vec3 axis = Vec3::UnitX();
    Vec3 center = Vec3::Zero();
    double angle = 0.0;
    std::optional<double> duration;
  };

  std::string set_name;
  std::vector<NodeId> nodes;
  std::array<bool, 3> mask{true, true, true};
  std::variant<Fixed, Ramp, Torsion> program;

  /// Prescribed displacement of a node at reference position x, time t.
  Vec3 displacement(const Vec3& x, double t) const;
  /// Zero for fixed programs; throws if the duration is unresolved.
  double load_duration() const;
  void resolve_duration(double default_duration);
};

enum class StepMode { central_difference, dynamic_relaxation };

struct SimState {
  std::vector<Vec3> u_prev, u_curr, u_next;
  std::vector<double> mass;
  std::vector<Vec3> f_ext, f_int;
  double dt = 0.0;
  double damping = 0.0;  // 1/s
  long step = 0;
  double time = 0.0;

  static SimState at_rest(std::vector<double> mass, double dt, double damping);

  double alpha() const noexcept { return 2.0 * dt * dt / (2.0 + damping * dt); }
  double beta() const noexcept { return (2.0 - damping * dt) / (2.0 + damping * dt); }
};

/// Advances one step: internal forces at u_curr, explicit update, direct
/// overwrite of constrained components with their program value at t + dt,
/// history shift. Throws DivergenceError on non-finite displacements.
void step(SimState& state, ForceAssembler& forces, const NodeCloud& cloud,
          std::span<const BoundaryCondition> bcs, StepMode mode);

struct Spectrum {
  double omega_min = 0.0;  // rad/s
  double omega_max = 0.0;
  int iterations = 0;
};

/// Extreme eigenfrequencies of the linearised, mass-scaled operator on the
/// free degrees of freedom (Lanczos with full reorthogonalisation).
Spectrum estimate_spectrum(ForceAssembler& forces, std::span<const double> mass,
                           std::span<const std::array<bool, 3>> constrained, double length_scale,
                           int iterations = 60);

struct SolverSettings {
  StepMode mode = StepMode::dynamic_relaxation;
  std::optional<double> dt;
  double safety = 0.5;
  double dt_factor = 1.0;         // scales the default step
  std::optional<double> damping;  // estimated as 2 * omega_min if unset
  std::optional<double> load_time;
  double load_steps = 200.0;      // load time in critical steps when unset
  double tol_u = 1e-9;            // m
  int settle_steps = 100;
  long max_steps = 2'000'000;
};

struct OutputSettings {
  std::filesystem::path dir;  // empty: no files
  std::string prefix = "run";
  long vtk_every = 0;         // 0: final snapshot only
  long summary_every = 10;
};

struct Problem {
  Model model;
  MaterialTable materials;
  std::vector<BoundaryCondition> bcs;
  ApproxSettings approx;
  SolverSettings solver;
  OutputSettings output;
};

enum class RunStatus { converged, not_converged, diverged, inverted };
const char* to_string(RunStatus s);

struct SeriesRow {
  long step;
  double time;
  double kinetic;        // sum m |u - u_prev|^2 / dt^2
  double max_increment;  // m
};

struct RunResult {
  RunStatus status = RunStatus::not_converged;
  std::string message;
  SimState state;
  ShapeTable table;
  std::vector<SeriesRow> series;
  Spectrum spectrum;
  double dt = 0.0;
  double critical_dt = 0.0;
  double damping = 0.0;
  double load_time = 0.0;
  double min_jacobian = 0.0;
  double seconds = 0.0;

  const std::vector<Vec3>& displacement() const noexcept { return state.u_curr; }
};

struct RunOptions {
  ForceOptions force;
  bool verbose = false;
};

/// Binds node sets to boundary conditions; BC entries whose nodes are
/// already filled are kept as they are.
void bind_boundary_conditions(const NodeCloud& cloud, std::vector<BoundaryCondition>& bcs);

RunResult run(const Problem& problem, const RunOptions& options = {});

}  // namespace efg
