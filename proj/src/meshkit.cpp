#include "afsi/meshkit.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "afsi/errors.hpp"

namespace afsi {

bool Mesh2D::has_tag(const std::string& tag) const {
  return std::any_of(boundary.begin(), boundary.end(), [&](const BoundaryEdge& e) { return e.tag == tag; });
}

std::vector<int> Mesh2D::edges_with_tag(const std::string& tag) const {
  std::vector<int> out;
  for (int e = 0; e < static_cast<int>(boundary.size()); ++e)
    if (boundary[e].tag == tag) out.push_back(e);
  return out;
}

std::vector<int> Mesh2D::nodes_with_tag(const std::string& tag) const {
  std::set<int> s;
  for (const auto& e : boundary) {
    if (e.tag != tag) continue;
    s.insert(e.a);
    s.insert(e.b);
  }
  return {s.begin(), s.end()};
}

std::vector<int> Mesh2D::boundary_nodes() const {
  std::set<int> s;
  for (const auto& e : boundary) {
    s.insert(e.a);
    s.insert(e.b);
  }
  return {s.begin(), s.end()};
}

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) { return 0.5 * cross(b - a, c - a); }

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

std::map<EdgeKey, std::vector<int>> edge_owners(const Mesh2D& mesh) {
  std::map<EdgeKey, std::vector<int>> owners;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) owners[key(tri[k], tri[(k + 1) % 3])].push_back(t);
  }
  return owners;
}

int third_node(const Triangle& tri, int a, int b) {
  for (int n : tri)
    if (n != a && n != b) return n;
  return -1;
}

}  // namespace

void validate_mesh(const Mesh2D& mesh) {
  std::ostringstream problems;
  int count = 0;
  auto report = [&](const std::string& msg) {
    if (count < 10) problems << (count ? "; " : "") << msg;
    ++count;
  };
  const int n = mesh.num_nodes();
  if (n == 0) report("mesh has no nodes");
  if (mesh.triangles.empty()) report("mesh has no triangles");
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    bool in_range = true;
    for (int v : tri) in_range = in_range && v >= 0 && v < n;
    if (!in_range) {
      report("triangle " + std::to_string(t) + " references a missing node");
      continue;
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      report("triangle " + std::to_string(t) + " repeats a node");
      continue;
    }
    if (signed_area(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]) <= 0.0)
      report("triangle " + std::to_string(t) + " has non-positive area (inverted element)");
  }
  if (count == 0) {
    auto owners = edge_owners(mesh);
    for (int e = 0; e < static_cast<int>(mesh.boundary.size()); ++e) {
      const auto& be = mesh.boundary[e];
      if (be.a < 0 || be.a >= n || be.b < 0 || be.b >= n || be.a == be.b) {
        report("boundary edge " + std::to_string(e) + " references invalid nodes");
        continue;
      }
      if (be.tag.empty()) report("boundary edge " + std::to_string(e) + " has no tag");
      auto it = owners.find(key(be.a, be.b));
      if (it == owners.end() || it->second.size() != 1)
        report("boundary edge " + std::to_string(e) + " (" + std::to_string(be.a) + ", " + std::to_string(be.b) +
               ") is dangling: it must belong to exactly one triangle");
    }
  }
  if (count > 0) {
    if (count > 10) problems << "; ... (" << count << " problems)";
    throw ValidationError("invalid mesh: " + problems.str());
  }
}

void finalize_mesh(Mesh2D& mesh) {
  validate_mesh(mesh);
  auto owners = edge_owners(mesh);
  for (auto& be : mesh.boundary) {
    const auto& tri = mesh.triangles[owners.at(key(be.a, be.b)).front()];
    int c = third_node(tri, be.a, be.b);
    if (signed_area(mesh.nodes[be.a], mesh.nodes[be.b], mesh.nodes[c]) < 0.0) std::swap(be.a, be.b);
  }
}

Mesh2D parse_mesh(std::istream& in, const std::string& source) {
  Mesh2D mesh;
  auto fail = [&](const std::string& msg, int line) { return ParseError(source + ": " + msg, line); };
  std::string raw;
  int lineno = 0;
  // Returns the next non-empty line with comments stripped.
  auto next = [&](std::string& out) {
    while (std::getline(in, raw)) {
      ++lineno;
      auto hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
      out = raw;
      return true;
    }
    return false;
  };
  auto expect_count = [&](const std::string& keyword) {
    std::string line;
    if (!next(line)) throw fail("unexpected end of file, expected '" + keyword + " <count>'", lineno + 1);
    std::istringstream ls(line);
    std::string word;
    long long cnt = -1;
    std::string extra;
    if (!(ls >> word >> cnt) || word != keyword || cnt < 0 || (ls >> extra))
      throw fail("expected '" + keyword + " <count>'", lineno);
    return static_cast<int>(cnt);
  };

  std::string line;
  if (!next(line)) throw fail("empty mesh file", lineno + 1);
  {
    std::istringstream ls(line);
    std::string magic;
    int version = 0;
    if (!(ls >> magic >> version) || magic != "fsimesh" || version != 1)
      throw fail("missing header 'fsimesh 1'", lineno);
  }

  const int nn = expect_count("nodes");
  mesh.nodes.resize(nn);
  for (int i = 0; i < nn; ++i) {
    if (!next(line)) throw fail("unexpected end of file in nodes block", lineno + 1);
    std::istringstream ls(line);
    std::string extra;
    if (!(ls >> mesh.nodes[i].x >> mesh.nodes[i].y) || (ls >> extra))
      throw fail("expected 'x y' for node " + std::to_string(i), lineno);
  }

  const int nt = expect_count("triangles");
  mesh.triangles.resize(nt);
  for (int t = 0; t < nt; ++t) {
    if (!next(line)) throw fail("unexpected end of file in triangles block", lineno + 1);
    std::istringstream ls(line);
    std::string extra;
    auto& tri = mesh.triangles[t];
    if (!(ls >> tri[0] >> tri[1] >> tri[2]) || (ls >> extra))
      throw fail("expected 'i j k' for triangle " + std::to_string(t), lineno);
  }

  const int nb = expect_count("boundary");
  mesh.boundary.resize(nb);
  for (int e = 0; e < nb; ++e) {
    if (!next(line)) throw fail("unexpected end of file in boundary block", lineno + 1);
    std::istringstream ls(line);
    std::string extra;
    auto& be = mesh.boundary[e];
    if (!(ls >> be.a >> be.b >> be.tag) || (ls >> extra))
      throw fail("expected 'i j tag' for boundary edge " + std::to_string(e), lineno);
  }
  if (next(line)) throw fail("unexpected content after boundary block", lineno);

  finalize_mesh(mesh);
  return mesh;
}

Mesh2D load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open mesh file: " + path.string());
  try {
    return parse_mesh(in, path.string());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_mesh(const Mesh2D& mesh, std::ostream& out) {
  out << "fsimesh 1\n";
  out << std::setprecision(17);
  out << "nodes " << mesh.nodes.size() << "\n";
  for (const auto& p : mesh.nodes) out << p.x << " " << p.y << "\n";
  out << "triangles " << mesh.triangles.size() << "\n";
  for (const auto& t : mesh.triangles) out << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "boundary " << mesh.boundary.size() << "\n";
  for (const auto& e : mesh.boundary) out << e.a << " " << e.b << " " << e.tag << "\n";
}

void write_mesh(const Mesh2D& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write mesh file: " + path.string());
  write_mesh(mesh, out);
}

VecField deformed(const Mesh2D& mesh, const VecField& u) {
  if (u.size() != mesh.nodes.size()) throw ValidationError("displacement field size does not match node count");
  VecField x(mesh.nodes.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = mesh.nodes[i] + u[i];
  return x;
}

Vec2 edge_normal(const Mesh2D& mesh, const VecField& coords, int e) {
  const auto& be = mesh.boundary[e];
  const Vec2 t = coords[be.b] - coords[be.a];
  return right_normal(t) * (1.0 / norm(t));
}

VecField boundary_normals(const Mesh2D& mesh, const VecField& coords, const std::string& tag) {
  auto edges = mesh.edges_with_tag(tag);
  if (edges.empty()) throw InputError("unknown boundary tag: " + tag);
  VecField n(mesh.nodes.size());
  for (int e : edges) {
    Vec2 ne = edge_normal(mesh, coords, e);
    n[mesh.boundary[e].a] += ne;
    n[mesh.boundary[e].b] += ne;
  }
  for (auto& v : n) {
    double len = norm(v);
    if (len > 0.0) v *= 1.0 / len;
  }
  return n;
}

VecField area_normals(const Mesh2D& mesh, const VecField& coords, const std::string& tag) {
  VecField a(mesh.nodes.size());
  for (int e : mesh.edges_with_tag(tag)) {
    const auto& be = mesh.boundary[e];
    double half = 0.5 * norm(coords[be.b] - coords[be.a]);
    Vec2 ne = edge_normal(mesh, coords, e) * half;
    a[be.a] += ne;
    a[be.b] += ne;
  }
  return a;
}

std::vector<double> local_edge_length(const Mesh2D& mesh, const VecField& coords) {
  std::vector<double> h(mesh.nodes.size(), std::numeric_limits<double>::infinity());
  for (const auto& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      int a = tri[k], b = tri[(k + 1) % 3];
      double len = norm(coords[b] - coords[a]);
      h[a] = std::min(h[a], len);
      h[b] = std::min(h[b], len);
    }
  }
  for (auto& v : h)
    if (!std::isfinite(v)) v = 1.0;
  return h;
}

double min_area(const Mesh2D& mesh, const VecField& coords) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& t : mesh.triangles) m = std::min(m, signed_area(coords[t[0]], coords[t[1]], coords[t[2]]));
  return m;
}

VtkField scalar_field(std::string name, std::vector<double> values) {
  return {std::move(name), 1, std::move(values)};
}

VtkField vector_field(std::string name, const VecField& values) {
  return {std::move(name), 2, flatten(values)};
}

void export_vtk(const std::filesystem::path& path, const Mesh2D& mesh, const VecField& coords,
                const std::vector<VtkField>& fields, const std::string& title) {
  const std::size_t n = mesh.nodes.size();
  if (coords.size() != n) throw ValidationError("VTK export: coordinate count does not match node count");
  for (const auto& f : fields) {
    if ((f.components != 1 && f.components != 2) || f.values.size() != n * f.components)
      throw ValidationError("VTK export: field '" + f.name + "' has " + std::to_string(f.values.size()) +
                            " values, expected " + std::to_string(n * std::max(f.components, 1)));
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write VTK file: " + path.string());
  out << std::setprecision(12);
  out << "# vtk DataFile Version 2.0\n";
  std::string t = title.substr(0, 255);
  std::replace(t.begin(), t.end(), '\n', ' ');
  out << t << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << n << " double\n";
  for (const auto& p : coords) out << p.x << " " << p.y << " 0\n";
  out << "CELLS " << mesh.triangles.size() << " " << 4 * mesh.triangles.size() << "\n";
  for (const auto& tri : mesh.triangles) out << "3 " << tri[0] << " " << tri[1] << " " << tri[2] << "\n";
  out << "CELL_TYPES " << mesh.triangles.size() << "\n";
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) out << "5\n";
  if (fields.empty()) return;
  out << "POINT_DATA " << n << "\n";
  for (const auto& f : fields) {
    if (f.components == 1) {
      out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : f.values) out << v << "\n";
    } else {
      out << "VECTORS " << f.name << " double\n";
      for (std::size_t i = 0; i < n; ++i) out << f.values[2 * i] << " " << f.values[2 * i + 1] << " 0\n";
    }
  }
}

}  // namespace afsi
