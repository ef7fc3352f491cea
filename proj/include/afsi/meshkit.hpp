#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "afsi/vec2.hpp"

namespace afsi {

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  std::string tag;
};

using Triangle = std::array<int, 3>;

/// Triangular mesh in its undeformed configuration. Deformed coordinates are
/// carried separately as a VecField (x = X + u).
struct Mesh2D {
  VecField nodes;
  std::vector<Triangle> triangles;
  std::vector<BoundaryEdge> boundary;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }

  bool has_tag(const std::string& tag) const;
  /// Indices into `boundary` of the edges carrying `tag`, in file order.
  std::vector<int> edges_with_tag(const std::string& tag) const;
  /// Sorted, unique node indices touched by edges carrying `tag`.
  std::vector<int> nodes_with_tag(const std::string& tag) const;
  /// Sorted, unique node indices touched by any boundary edge.
  std::vector<int> boundary_nodes() const;
};

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c);

/// Throws ValidationError listing the offending entities.
void validate_mesh(const Mesh2D& mesh);

/// Validates and orients every boundary edge so that its owning triangle lies
/// to the left of a -> b. Edge normals rely on this orientation.
void finalize_mesh(Mesh2D& mesh);

Mesh2D parse_mesh(std::istream& in, const std::string& source = "<stream>");
/// Throws InputError if the file cannot be opened, ParseError on malformed
/// content and ValidationError when the mesh invariants fail.
Mesh2D load_mesh(const std::filesystem::path& path);
void write_mesh(const Mesh2D& mesh, std::ostream& out);
void write_mesh(const Mesh2D& mesh, const std::filesystem::path& path);

VecField deformed(const Mesh2D& mesh, const VecField& u);

/// Outward unit normal of boundary edge `e` in configuration `coords`.
/// Requires a finalized mesh.
Vec2 edge_normal(const Mesh2D& mesh, const VecField& coords, int e);

/// Per-node unit normals for nodes on `tag`; zero elsewhere. A node normal is
/// the normalized mean of the unit normals of its adjacent tagged edges.
VecField boundary_normals(const Mesh2D& mesh, const VecField& coords, const std::string& tag);

/// Per-node area normals: each tagged edge contributes half its length times
/// its outward normal to both end nodes.
VecField area_normals(const Mesh2D& mesh, const VecField& coords, const std::string& tag);

/// Shortest triangle edge incident to each node.
std::vector<double> local_edge_length(const Mesh2D& mesh, const VecField& coords);

double min_area(const Mesh2D& mesh, const VecField& coords);

struct VtkField {
  std::string name;
  int components = 1;  // 1 (scalar) or 2 (vector)
  std::vector<double> values;
};

VtkField scalar_field(std::string name, std::vector<double> values);
VtkField vector_field(std::string name, const VecField& values);

/// Legacy ASCII VTK 2.0 unstructured grid. Throws ValidationError when a
/// field length does not match the node count.
void export_vtk(const std::filesystem::path& path, const Mesh2D& mesh, const VecField& coords,
                const std::vector<VtkField>& fields, const std::string& title = "afsi");

}  // namespace afsi
