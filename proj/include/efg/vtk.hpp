#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>

#include "efg/cloud.hpp"

namespace efg {

/// Legacy ASCII VTK unstructured grid. Points are the nodes; cells are the
/// background tetrahedra (type 10) when their vertices are the nodes,
/// otherwise one VERTEX cell (type 1) per node. Displacement goes out as
/// POINT_DATA VECTORS.
void write_vtk(std::ostream& out, const Model& model, std::span<const Vec3> displacement,
               const std::string& title = "efg");
void write_vtk(const std::filesystem::path& path, const Model& model,
               std::span<const Vec3> displacement, const std::string& title = "efg");

}  // namespace efg
