#include "efg/vtk.hpp"

#include <fstream>
#include <iomanip>

#include "efg/errors.hpp"

namespace efg {

void write_vtk(std::ostream& out, const Model& model, std::span<const Vec3> displacement,
               const std::string& title)
{
  const auto& nodes = model.cloud.coords;
  if (!displacement.empty() && displacement.size() != nodes.size())
    throw ConfigError("displacement field does not match node count");

  out << "# vtk DataFile Version 3.0\n" << title.substr(0, 255) << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << std::setprecision(12);
  out << "POINTS " << nodes.size() << " double\n";
  for (const auto& p : nodes)
    out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';

  if (model.grid.vertices_are_nodes && !model.grid.cells.empty()) {
    const auto& cells = model.grid.cells;
    out << "CELLS " << cells.size() << ' ' << cells.size() * 5 << '\n';
    for (const auto& c : cells)
      out << "4 " << c[0] << ' ' << c[1] << ' ' << c[2] << ' ' << c[3] << '\n';
    out << "CELL_TYPES " << cells.size() << '\n';
    for (std::size_t c = 0; c < cells.size(); ++c)
      out << "10\n";
  } else {
    out << "CELLS " << nodes.size() << ' ' << nodes.size() * 2 << '\n';
    for (std::size_t i = 0; i < nodes.size(); ++i)
      out << "1 " << i << '\n';
    out << "CELL_TYPES " << nodes.size() << '\n';
    for (std::size_t i = 0; i < nodes.size(); ++i)
      out << "1\n";
  }

  out << "POINT_DATA " << nodes.size() << "\nVECTORS displacement double\n";
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Vec3 u = displacement.empty() ? Vec3::Zero() : displacement[i];
    out << u.x() << ' ' << u.y() << ' ' << u.z() << '\n';
  }
}

void write_vtk(const std::filesystem::path& path, const Model& model,
               std::span<const Vec3> displacement, const std::string& title)
{
  std::ofstream out(path);
  if (!out)
    throw DataError("cannot write " + path.string());
  write_vtk(out, model, displacement, title);
}

}  // namespace efg
