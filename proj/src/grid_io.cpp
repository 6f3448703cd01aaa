#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "efg/cloud.hpp"
#include "efg/errors.hpp"

namespace efg {
namespace fs = std::filesystem;
namespace {

std::ifstream open_input(const fs::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open " + path.string());
  return in;
}

// Strips comments and splits on whitespace.
std::vector<std::string> tokens(const std::string& line)
{
  std::vector<std::string> out;
  std::istringstream ss(line.substr(0, line.find('#')));
  std::string tok;
  while (ss >> tok)
    out.push_back(tok);
  return out;
}

double parse_double(const std::string& tok, const fs::path& file, std::size_t line)
{
  // strtod accepts "nan"/"inf", which are rejected later as data errors
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw ParseError(file.string(), line, "expected a number, got '" + tok + "'");
  return v;
}

long parse_int(const std::string& tok, const fs::path& file, std::size_t line)
{
  long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || v < 0)
    throw ParseError(file.string(), line, "expected a non-negative integer, got '" + tok + "'");
  return v;
}

void write_set(const fs::path& path, const std::vector<NodeId>& ids)
{
  std::ofstream out(path);
  if (!out)
    throw DataError("cannot write " + path.string());
  for (NodeId id : ids)
    out << id << '\n';
}

}  // namespace

std::vector<Vec3> read_nodes_file(const fs::path& path)
{
  auto in = open_input(path);
  std::vector<Vec3> nodes;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = tokens(line);
    if (tok.empty())
      continue;
    if (tok.size() != 3)
      throw ParseError(path.string(), lineno, "expected 3 coordinates");
    Vec3 p(parse_double(tok[0], path, lineno), parse_double(tok[1], path, lineno),
           parse_double(tok[2], path, lineno));
    if (!p.allFinite())
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": non-finite coordinate");
    nodes.push_back(p);
  }
  return nodes;
}

std::vector<std::array<NodeId, 4>> read_cells_file(const fs::path& path, std::vector<int>* regions)
{
  auto in = open_input(path);
  std::vector<std::array<NodeId, 4>> cells;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = tokens(line);
    if (tok.empty())
      continue;
    if (tok.size() != 4 && tok.size() != 5)
      throw ParseError(path.string(), lineno, "expected 4 vertex ids and an optional region id");
    std::array<NodeId, 4> c{};
    for (int k = 0; k < 4; ++k)
      c[k] = static_cast<NodeId>(parse_int(tok[k], path, lineno));
    cells.push_back(c);
    if (regions)
      regions->push_back(tok.size() == 5 ? static_cast<int>(parse_int(tok[4], path, lineno)) : 0);
  }
  return cells;
}

std::vector<NodeId> read_node_set_file(const fs::path& path)
{
  auto in = open_input(path);
  std::vector<NodeId> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = tokens(line);
    if (tok.empty())
      continue;
    if (tok.size() != 1)
      throw ParseError(path.string(), lineno, "expected one node id");
    ids.push_back(static_cast<NodeId>(parse_int(tok[0], path, lineno)));
  }
  return ids;
}

Model load_grid(const fs::path& nodes_file, const fs::path& cells_file)
{
  Model m;
  m.cloud.coords = read_nodes_file(nodes_file);
  m.grid.vertices = m.cloud.coords;
  m.grid.vertices_are_nodes = true;
  m.grid.cells = read_cells_file(cells_file, &m.grid.region);
  for (std::size_t c = 0; c < m.grid.cells.size(); ++c) {
    auto& t = m.grid.cells[c];
    for (NodeId id : t)
      if (id >= m.grid.vertices.size())
        throw DataError(cells_file.string() + ": cell " + std::to_string(c) +
                        " references node " + std::to_string(id) + " out of range");
    const double v = m.grid.cell_volume(c);
    if (std::abs(v) < 1e-18)
      throw DataError(cells_file.string() + ": cell " + std::to_string(c) + " is degenerate");
    if (v < 0.0)
      std::swap(t[2], t[3]);
  }
  return m;
}

void save_model(const Model& model, const fs::path& dir)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw DataError("cannot create directory " + dir.string() + ": " + ec.message());

  {
    std::ofstream out(dir / "nodes.txt");
    if (!out)
      throw DataError("cannot write " + (dir / "nodes.txt").string());
    out << std::setprecision(17);
    for (const auto& p : model.cloud.coords)
      out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  }
  {
    std::ofstream out(dir / "cells.txt");
    if (!out)
      throw DataError("cannot write " + (dir / "cells.txt").string());
    const bool multi = std::any_of(model.grid.region.begin(), model.grid.region.end(),
                                   [](int r) { return r != 0; });
    for (std::size_t c = 0; c < model.grid.cells.size(); ++c) {
      const auto& t = model.grid.cells[c];
      out << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3];
      if (multi)
        out << ' ' << model.grid.region[c];
      out << '\n';
    }
  }
  for (const auto& [name, ids] : model.cloud.node_sets)
    write_set(dir / ("set_" + name + ".txt"), ids);
}

Model load_model(const fs::path& dir)
{
  if (!fs::is_directory(dir))
    throw DataError("model directory " + dir.string() + " does not exist");
  Model m = load_grid(dir / "nodes.txt", dir / "cells.txt");
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string fname = entry.path().filename().string();
    if (fname.rfind("set_", 0) == 0 && entry.path().extension() == ".txt") {
      const std::string name = fname.substr(4, fname.size() - 8);
      m.cloud.node_sets[name] = read_node_set_file(entry.path());
    }
  }
  m.cloud.validate();
  return m;
}

}  // namespace efg
