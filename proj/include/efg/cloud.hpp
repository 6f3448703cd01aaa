#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace efg {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using NodeId = std::uint32_t;

/// Scattered nodes in the reference configuration plus named node sets.
struct NodeCloud {
  std::vector<Vec3> coords;
  std::map<std::string, std::vector<NodeId>> node_sets;

  std::size_t size() const noexcept { return coords.size(); }
  const std::vector<NodeId>& set(const std::string& name) const;

  /// Throws DataError on non-finite coordinates or out-of-range set ids.
  void validate() const;
};

/// Tetrahedral background grid used only for quadrature. The grid owns its
/// vertex list; for generated shapes the vertices coincide with the nodes.
struct IntegrationGrid {
  std::vector<Vec3> vertices;
  std::vector<std::array<NodeId, 4>> cells;
  std::vector<int> region;
  bool vertices_are_nodes = false;

  std::size_t size() const noexcept { return cells.size(); }
  double cell_volume(std::size_t c) const;
  double total_volume() const;

  /// Throws DataError on bad ids or cells with |volume| < 1e-18 m^3.
  void validate() const;
};

struct Model {
  NodeCloud cloud;
  IntegrationGrid grid;
};

struct GaussPoint {
  Vec3 position;
  double weight;  // m^3
  std::uint32_t cell;
  int region;
};

double signed_tet_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

/// Regular nodes_per_edge^3 lattice on [0, edge]^3; each sub-cube is split
/// into 6 tetrahedra sharing its main diagonal. Node sets: bottom, top,
/// xmin, xmax, ymin, ymax.
Model generate_cube_grid(double edge, int nodes_per_edge);

/// Cylinder with its axis along z, base centred at the origin, z in
/// [0, height]. Nodes are laid out in hexagonal rings per layer; each layer
/// triangle is extruded to a prism and split into 3 tetrahedra. Node sets:
/// bottom, top.
Model generate_cylinder_grid(double height, double diameter, double target_spacing);

/// Cube root of volume per node.
double average_spacing(const Model& model);

/// 4-point rule, barycentric (b, a, a, a) and permutations, weight V/4.
std::vector<GaussPoint> gauss_points(const IntegrationGrid& grid);

// File I/O. Nodes: "x y z" per line. Cells: "n0 n1 n2 n3 [region]" per line.
// Node sets: one id per line. '#' starts a comment.
std::vector<Vec3> read_nodes_file(const std::filesystem::path& path);
std::vector<std::array<NodeId, 4>> read_cells_file(const std::filesystem::path& path,
                                                   std::vector<int>* regions = nullptr);
std::vector<NodeId> read_node_set_file(const std::filesystem::path& path);

/// Loads nodes and cells; cells with negative volume are repaired by
/// swapping two vertices.
Model load_grid(const std::filesystem::path& nodes_file, const std::filesystem::path& cells_file);

/// Writes nodes.txt, cells.txt and one set_<name>.txt per node set.
void save_model(const Model& model, const std::filesystem::path& dir);

/// Inverse of save_model.
Model load_model(const std::filesystem::path& dir);

/// Uniform bucket grid over the node cloud for radius queries.
class NeighborIndex {
public:
  explicit NeighborIndex(const NodeCloud& cloud);

  const NodeCloud& cloud() const noexcept { return *cloud_; }

  /// Ids of all nodes with |x - x_i| <= radius, sorted ascending.
  std::vector<NodeId> within(const Vec3& x, double radius) const;

  NodeId nearest(const Vec3& x) const;

  /// Mean distance from node i to its 4 nearest other nodes.
  double node_spacing(NodeId i) const { return spacing_[i]; }

  /// Distance from node i to its nearest other node.
  double nearest_distance(NodeId i) const { return nearest_[i]; }

  double diameter() const noexcept { return diameter_; }

private:
  std::array<long, 3> bucket_of(const Vec3& x) const;
  std::vector<std::pair<double, NodeId>> k_nearest(NodeId i, std::size_t k) const;

  const NodeCloud* cloud_;
  Vec3 lo_;
  double cell_;
  std::array<long, 3> dims_{};
  std::vector<std::uint32_t> bucket_start_;
  std::vector<NodeId> bucket_nodes_;
  std::vector<double> spacing_;
  std::vector<double> nearest_;
  double diameter_ = 0.0;
};

/// Nodes of a support domain.
struct SupportQuery {
  std::vector<NodeId> nodes;  // sorted
  double radius = 0.0;        // r_SD, m
};

/// All nodes strictly inside r_SD, growing r_SD from r_init by 1.2 until at
/// least n_min nodes are inside. Throws DataError once r_SD exceeds twice
/// the cloud diameter.
SupportQuery find_support(const Vec3& x, const NeighborIndex& index, std::size_t n_min,
                          double r_init);

/// Default initial radius: factor times the spacing of the node nearest x.
double default_support_radius(const Vec3& x, const NeighborIndex& index, double factor = 1.8);

}  // namespace efg
