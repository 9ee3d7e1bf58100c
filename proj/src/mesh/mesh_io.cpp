#include "vortishape/mesh/mesh_io.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace vortishape::mesh {

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return f;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}


}  // namespace

static double mean_boundary_length(const std::vector<Vec2>& v, const std::vector<BoundaryEdge>& b) {
  if (b.empty()) return 0.0;
  double s = 0.0;
  for (const auto& e : b) s += (v[e.v[1]] - v[e.v[0]]).norm();
  return s / static_cast<double>(b.size());
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << std::setprecision(17);
  os << mesh.num_vertices() << ' ' << mesh.num_triangles() << ' ' << mesh.boundary_edges().size() << "\n";
  for (const auto& p : mesh.vertices()) os << p.x() << ' ' << p.y() << "\n";
  for (const auto& t : mesh.triangles()) os << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << " 0\n";
  for (const auto& b : mesh.boundary_edges())
    os << b.v[0] + 1 << ' ' << b.v[1] + 1 << ' ' << static_cast<int>(b.tag) << "\n";
}

Mesh read_mesh(std::istream& is, double h_target) {
  size_t nv = 0, nt = 0, nb = 0;
  if (!(is >> nv >> nt >> nb)) throw std::runtime_error("mesh file: bad header");
  std::vector<Vec2> v(nv);
  for (auto& p : v) is >> p.x() >> p.y();
  std::vector<Triangle> t(nt);
  for (auto& tr : t) {
    int region = 0;
    is >> tr[0] >> tr[1] >> tr[2] >> region;
    for (int& i : tr) --i;
  }
  std::vector<BoundaryEdge> b(nb);
  for (auto& e : b) {
    int tag = 0;
    is >> e.v[0] >> e.v[1] >> tag;
    --e.v[0];
    --e.v[1];
    e.tag = tag_from_int(tag);
  }
  if (!is) throw std::runtime_error("mesh file truncated");
  if (h_target <= 0.0) h_target = mean_boundary_length(v, b);
  return Mesh(std::move(v), std::move(t), std::move(b), h_target);
}

void save_mesh(const std::string& path, const Mesh& mesh) {
  auto f = open_out(path);
  write_mesh(f, mesh);
}

Mesh load_mesh(const std::string& path, double h_target) {
  auto f = open_in(path);
  return read_mesh(f, h_target);
}

GmshTagTable default_gmsh_tags() {
  return {{1, BoundaryTag::Inflow}, {2, BoundaryTag::Wall}, {3, BoundaryTag::Outflow}, {4, BoundaryTag::Free}};
}

Mesh read_gmsh(std::istream& is, const GmshTagTable& table, double h_target) {
  std::string line;
  std::map<long, int> node_index;
  std::vector<Vec2> verts;
  std::vector<Triangle> tris;
  std::vector<BoundaryEdge> edges;
  while (std::getline(is, line)) {
    if (line.rfind("$MeshFormat", 0) == 0) {
      std::getline(is, line);
      std::istringstream ss(line);
      double ver = 0;
      ss >> ver;
      if (ver < 2.0 || ver >= 3.0) throw std::runtime_error("only MSH 2.x ASCII is supported");
    } else if (line.rfind("$Nodes", 0) == 0) {
      size_t n = 0;
      is >> n;
      for (size_t i = 0; i < n; ++i) {
        long id;
        double x, y, z;
        is >> id >> x >> y >> z;
        node_index[id] = static_cast<int>(verts.size());
        verts.emplace_back(x, y);
      }
    } else if (line.rfind("$Elements", 0) == 0) {
      size_t n = 0;
      is >> n;
      std::getline(is, line);
      for (size_t i = 0; i < n; ++i) {
        std::getline(is, line);
        std::istringstream ss(line);
        long id;
        int type, ntags;
        ss >> id >> type >> ntags;
        std::vector<int> tags(ntags);
        for (auto& t : tags) ss >> t;
        std::vector<long> nodes;
        long nd;
        while (ss >> nd) nodes.push_back(nd);
        auto idx = [&](long g) {
          auto it = node_index.find(g);
          if (it == node_index.end()) throw std::runtime_error("gmsh element references unknown node");
          return it->second;
        };
        if (type == 1 && nodes.size() >= 2) {
          if (ntags < 1) throw std::runtime_error("gmsh line element without physical tag");
          auto it = table.find(tags[0]);
          if (it == table.end())
            throw std::runtime_error("gmsh physical id " + std::to_string(tags[0]) + " has no boundary tag");
          edges.push_back({{idx(nodes[0]), idx(nodes[1])}, it->second});
        } else if (type == 2 && nodes.size() >= 3) {
          tris.push_back({idx(nodes[0]), idx(nodes[1]), idx(nodes[2])});
        }
      }
    }
  }
  if (verts.empty() || tris.empty()) throw std::runtime_error("gmsh file has no triangles");
  if (h_target <= 0.0) h_target = mean_boundary_length(verts, edges);
  return Mesh(std::move(verts), std::move(tris), std::move(edges), h_target);
}

Mesh load_gmsh(const std::string& path, const GmshTagTable& tags, double h_target) {
  auto f = open_in(path);
  return read_gmsh(f, tags, h_target);
}

void write_polyline_csv(const std::string& path, const std::vector<Vec2>& pts) {
  auto f = open_out(path);
  f << std::setprecision(17) << "x,y\n";
  for (const auto& p : pts) f << p.x() << ',' << p.y() << '\n';
}

std::vector<Vec2> read_polyline_csv(const std::string& path) {
  auto f = open_in(path);
  std::string line;
  std::vector<Vec2> pts;
  std::getline(f, line);
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("bad polyline row: " + line);
    pts.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
  }
  return pts;
}

}  // namespace vortishape::mesh
