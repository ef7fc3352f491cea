#pragma once

#include <string>
#include <vector>

#include "afsi/fluid.hpp"
#include "afsi/mapping.hpp"

namespace afsi {

enum class ObjectiveKind { interface_drag, power_loss, interface_energy_fluid, interface_energy_structure };

ObjectiveKind parse_objective_kind(const std::string& name);
std::string to_string(ObjectiveKind kind);

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::interface_drag;
  double weight = 1.0;
  Vec2 direction{1.0, 0.0};
  std::string tag = "interface";

  void validate() const;
};

/// Primal quantities an objective may depend on.
struct ObjectiveContext {
  const FluidSetup& setup;
  const VecField& fluid_coords;
  const FluidState& fluid;
  const VecField& u_structure;
  const VecField& f_fluid;  // fluid interface forces
  const InterfaceMaps& maps;
};

/// Coupling sources of the partitioned adjoint: the force projection d on
/// the fluid interface, the adjoint body force of the mesh motion and the
/// adjoint interface force of the structure.
struct AuxiliaryData {
  VecField d;
  VecField f_mesh;
  VecField f_structure;
};

double eval_interface_drag(const VecField& f_fluid, const Vec2& direction);

/// Mechanical energy flux into the fluid domain through inlet, outlet and
/// walls: -sum_i (p_i + rho |v_i|^2 / 2)(A_i . v_i) with outward nodal area normals A_i.
double eval_power_loss(const FluidSetup& setup, const VecField& coords, const FluidState& state);

struct PowerLossPartials {
  std::vector<double> dw;  // size 3n
  VecField dx;
};
PowerLossPartials power_loss_partials(const FluidSetup& setup, const VecField& coords, const FluidState& state);

enum class EnergySide { fluid, structure };
/// Fluid side (H^S u)^T f, structure side u^T (H^F f).
double eval_interface_energy(const VecField& u_structure, const VecField& f_fluid, const InterfaceMaps& maps,
                             EnergySide side);

double eval_objective(const ObjectiveSpec& spec, const ObjectiveContext& ctx);
/// Weighted sum over specs.
double eval_objectives(const std::vector<ObjectiveSpec>& specs, const ObjectiveContext& ctx);

/// Weighted partial derivatives. Force dependence is carried by fluid.d, so
/// that J = J_explicit(w, x, u^S) + d . f^F.
struct ObjectivePartials {
  FluidObjectiveTerms fluid;
  VecField du_structure;
};
ObjectivePartials objective_partials(const ObjectiveSpec& spec, const ObjectiveContext& ctx);
ObjectivePartials objective_partials(const std::vector<ObjectiveSpec>& specs, const ObjectiveContext& ctx);

}  // namespace afsi
