#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "afsi/fluid.hpp"
#include "afsi/mapping.hpp"
#include "afsi/meshmotion.hpp"
#include "afsi/objectives.hpp"
#include "afsi/structure.hpp"

namespace afsi {

/// Complete description of a steady FSI case on undeformed meshes.
struct FsiProblem {
  Mesh2D fluid_mesh;
  Mesh2D structure_mesh;
  FlowParams flow;
  FluidBoundary fluid_bc;
  FluidOptions fluid_opts;
  MaterialStVK material;
  StructureOptions structure_opts;
  std::string dirichlet_tag = "dirichlet";
  PseudoElasticParams mesh_params;
  MappingMethod mapping = MappingMethod::nearest_element;
  ForceMode force_mode = ForceMode::conservative;
  std::string interface_tag = "interface";
  /// Length used for the flexibility level kappa = max |u^S_I| / l.
  double characteristic_length = 1.0;
};

/// Discipline solvers and mapping operators built once from an FsiProblem.
class FsiSystem {
public:
  explicit FsiSystem(FsiProblem problem);
  FsiSystem(const FsiSystem&) = delete;
  FsiSystem& operator=(const FsiSystem&) = delete;

  const FsiProblem& problem() const { return problem_; }
  const FluidSetup& fluid() const { return fluid_; }
  const MeshMotion& mesh_motion() const { return *mesh_motion_; }
  const InterfaceMaps& maps() const { return maps_; }
  const std::vector<int>& structure_dirichlet() const { return dirichlet_; }
  const std::vector<int>& structure_interface() const { return structure_interface_; }
  const std::vector<int>& fluid_interface() const { return fluid_interface_; }

private:
  FsiProblem problem_;
  FluidSetup fluid_;
  std::unique_ptr<MeshMotion> mesh_motion_;
  InterfaceMaps maps_;
  std::vector<int> dirichlet_, structure_interface_, fluid_interface_;
};

struct CouplingConfig {
  double tolerance = 1e-8;
  int max_iterations = 100;
  double aitken_initial = 0.5;
  double omega_min = 0.01;
  double omega_max = 1.0;
  /// The adjoint loop stops when the interface residual is below
  /// adjoint_tolerance times the norm of the structural interface adjoint.
  double adjoint_tolerance = 1e-8;
  Formulation formulation = Formulation::complete;
  /// Single fluid and mesh adjoint pass with the structural adjoint held at zero.
  bool uncoupled = false;

  void validate() const;
};

/// omega_next = -omega_prev * d_prev.(d_curr - d_prev) / |d_curr - d_prev|^2, clamped.
double aitken_update(const std::vector<double>& delta_prev, const std::vector<double>& delta_curr, double omega_prev,
                     double omega_min, double omega_max);

struct FsiEquilibrium {
  FluidState fluid;
  StructureState structure;
  VecField mesh_displacement;
  VecField fluid_coords;
  VecField interface_forces;
  /// Relaxed structural interface displacement the fluid was solved with.
  VecField interface_displacement;
  std::vector<double> residual_history;
  int iterations = 0;
  double kappa = 0.0;
};

/// Dirichlet-Neumann block Gauss-Seidel iteration with Aitken relaxation of
/// the structural interface displacement. A previous equilibrium may be
/// passed as a warm start.
FsiEquilibrium run_fsi(const FsiSystem& system, const CouplingConfig& config, const FsiEquilibrium* warm = nullptr);

ObjectiveContext objective_context(const FsiSystem& system, const FsiEquilibrium& eq);

struct AdjointBundle {
  std::vector<double> psi_fluid;
  VecField psi_structure;
  VecField psi_mesh;
  /// d L^F / d x^F with state and adjoint frozen (fluid mesh sized).
  VecField fluid_partials;
  /// d L^M / d X^F (fluid mesh sized).
  VecField mesh_partials;
  /// d L^S / d X^S (structure mesh sized).
  VecField structure_partials;
  std::vector<double> residual_history;
  int iterations = 0;
  Formulation formulation = Formulation::complete;
  bool uncoupled = false;
};

/// Partitioned adjoint FSI: fluid adjoint with force projection d, fluid
/// shape partials, mesh-motion adjoint, structural adjoint with the mapped
/// interface load, and Aitken relaxation of the structural interface adjoint.
AdjointBundle run_adjoint_fsi(const FsiSystem& system, const FsiEquilibrium& eq,
                              const std::vector<ObjectiveSpec>& objectives, const CouplingConfig& config);

struct SensitivityField {
  std::vector<int> nodes;  // fluid mesh node ids
  VecField points;         // undeformed positions
  VecField gradient;
  VecField normals;        // pointing out of the structure
  std::vector<double> normal_component;
};

/// Interface nodes not shared with any other tagged boundary.
std::vector<int> default_design_nodes(const FsiSystem& system);
/// Unit normals on the fluid interface nodes, pointing out of the structure.
VecField design_normals(const FsiSystem& system);

/// Shape gradient at fluid interface design nodes: fluid and mesh partials
/// plus the structural partials carried over by H^S.
SensitivityField assemble_coupled_sensitivity(const FsiSystem& system, const AdjointBundle& bundle,
                                              const std::vector<int>& design_nodes);

std::vector<double> project_to_normal(const VecField& field, const VecField& normals);

/// CSV with columns iter, primal_residual, adjoint_residual.
void write_history_csv(const std::filesystem::path& path, const std::vector<double>& primal,
                       const std::vector<double>& adjoint, const std::string& header_comment = "");

}  // namespace afsi
