#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "vortishape/mesh/mesh.hpp"

namespace vortishape::mesh {

/// Plain-text mesh format, 1-based indices:
///   nv nt nbe
///   x y            (nv lines)
///   i j k region   (nt lines)
///   i j tag        (nbe lines; 1 inflow, 2 wall, 3 outflow, 4 free)
/// Coordinates are written with 17 significant digits so files round-trip.
/// When h_target is 0 on read, the mean boundary edge length is used.
void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is, double h_target = 0.0);
void save_mesh(const std::string& path, const Mesh& mesh);
Mesh load_mesh(const std::string& path, double h_target = 0.0);

/// Maps Gmsh physical ids of line elements to boundary tags.
using GmshTagTable = std::map<int, BoundaryTag>;
GmshTagTable default_gmsh_tags();

/// Gmsh MSH 2.2 ASCII subset: $Nodes plus 2-node lines and 3-node triangles.
Mesh read_gmsh(std::istream& is, const GmshTagTable& tags, double h_target = 0.0);
Mesh load_gmsh(const std::string& path, const GmshTagTable& tags, double h_target = 0.0);

/// Closed polyline as `x,y` rows with a header.
void write_polyline_csv(const std::string& path, const std::vector<Vec2>& pts);
std::vector<Vec2> read_polyline_csv(const std::string& path);

}  // namespace vortishape::mesh
