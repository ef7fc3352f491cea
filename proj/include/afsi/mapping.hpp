#pragma once

#include <array>
#include <string>
#include <vector>

#include "afsi/meshkit.hpp"
#include "afsi/numkit.hpp"

namespace afsi {

enum class MappingMethod { nearest_element, mortar };
enum class ForceMode { conservative, consistent };

/// Polyline of a tagged boundary: mesh node ids, their coordinates and the
/// edges as pairs of local indices.
struct InterfaceCurve {
  std::string tag;
  std::vector<int> nodes;
  VecField points;
  std::vector<std::array<int, 2>> edges;
  int mesh_size = 0;
};

InterfaceCurve interface_curve(const Mesh2D& mesh, const std::string& tag);

/// Interface transfer matrix H (target interface nodes x source interface
/// nodes) built on undeformed geometry.
struct MappingOperator {
  SparseMatrix H;
  std::string source_tag;
  std::string target_tag;
  std::vector<int> source_nodes;
  std::vector<int> target_nodes;
  VecField source_points;
  VecField target_points;
  int source_mesh_size = 0;
  int target_mesh_size = 0;
  MappingMethod method = MappingMethod::nearest_element;
  bool matching = false;
};

/// Each target node is projected onto its nearest source edge (lowest edge
/// index on ties, clamped to the edge ends).
MappingOperator build_nearest_element(const InterfaceCurve& source, const InterfaceCurve& target);
/// Standard mortar: H = M_tt^-1 M_ts on the target polyline.
MappingOperator build_mortar(const InterfaceCurve& source, const InterfaceCurve& target);
MappingOperator build_mapping(const InterfaceCurve& source, const InterfaceCurve& target, MappingMethod method);

/// target = H source, on mesh-sized fields (zero off the target interface).
VecField map_consistent(const MappingOperator& op, const VecField& source);
/// source = H^T target, on mesh-sized fields (zero off the source interface).
VecField map_conservative(const MappingOperator& op, const VecField& target);

/// The pair of operators used by the coupling: H^S carries structure
/// displacements to the fluid; H^F carries fluid forces to the structure,
/// either as (H^S)^T or as a separate consistent operator.
struct InterfaceMaps {
  MappingOperator hs;
  MappingOperator hf_consistent;
  ForceMode force_mode = ForceMode::conservative;

  VecField displacement_to_fluid(const VecField& u_structure) const;
  VecField force_to_structure(const VecField& f_fluid) const;
  /// (H^S)^T applied to a fluid-sized field.
  VecField hs_transpose(const VecField& fluid_field) const;
  /// (H^F)^T applied to a structure-sized field.
  VecField hf_transpose(const VecField& structure_field) const;
};

InterfaceMaps build_interface_maps(const Mesh2D& fluid, const Mesh2D& structure, MappingMethod method,
                                   ForceMode mode, const std::string& tag = "interface");

}  // namespace afsi
