#pragma once

#include <string>
#include <vector>

#include "afsi/meshkit.hpp"
#include "afsi/numkit.hpp"

namespace afsi {

struct FlowParams {
  double density = 1.0;
  double viscosity = 1.0;
  /// Drop convection and SUPG; PSPG keeps tau = h^2 / (4 nu). The residual is then linear.
  bool stokes = false;

  void validate() const;
};

/// Inflow v_x = v_max * sin(pi * (y - y0) / height), v_y = 0.
struct InflowProfile {
  double v_max = 0.0;
  double y0 = 0.0;
  double height = 1.0;

  Vec2 velocity(const Vec2& x) const;
  /// d v_x / d y.
  double slope(const Vec2& x) const;
};

struct FluidBoundary {
  std::string interface_tag = "interface";
  std::string inlet_tag = "inlet";
  std::string outlet_tag = "outlet";
  std::vector<std::string> wall_tags{"wall"};
  InflowProfile inflow;
};

struct FluidOptions {
  double newton_rtol = 1e-10;
  double newton_atol = 1e-13;
  int max_iterations = 25;
  int max_ramp_steps = 5;
  double fd_step_factor = 1e-6;
};

/// Everything the fluid discipline needs besides the deformed coordinates.
struct FluidSetup {
  const Mesh2D* mesh = nullptr;
  FlowParams params;
  FluidBoundary bc;
  FluidOptions opts;
};

/// Unknowns interleaved per node as [vx, vy, p].
struct FluidState {
  std::vector<double> w;
  int newton_iterations = 0;
  std::vector<double> residual_history;

  Vec2 velocity(int node) const { return {w[3 * node], w[3 * node + 1]}; }
  double pressure(int node) const { return w[3 * node + 2]; }
  VecField velocities() const;
  std::vector<double> pressures() const;
};

/// Row/column classification of the fluid unknowns.
struct FluidDofs {
  std::vector<bool> dirichlet;  // per unknown
  std::vector<double> value;    // prescribed value at inflow scale 1
  std::vector<int> interface_nodes;
  std::vector<bool> interface;  // per node
  std::vector<bool> inlet;      // per node, velocity prescribed by the inflow profile
  std::vector<bool> boundary;   // per node, on any tagged edge
  int pinned_pressure = -1;     // node whose pressure is fixed to zero, or -1
};

FluidDofs fluid_dofs(const FluidSetup& setup, const VecField& coords);

/// Element-assembled residual without boundary conditions (the weak form
/// tested with every shape function).
std::vector<double> residual_fluid_unmodified(const FluidSetup& setup, const VecField& coords,
                                              const std::vector<double>& w);
SparseMatrix jacobian_fluid_unmodified(const FluidSetup& setup, const VecField& coords, const std::vector<double>& w);

/// Residual with Dirichlet rows replaced by w - w_bar (inflow scaled by `inflow_scale`).
std::vector<double> residual_fluid(const FluidSetup& setup, const VecField& coords, const std::vector<double>& w,
                                   double inflow_scale = 1.0);
/// Analytic Jacobian of residual_fluid.
SparseMatrix jacobian_fluid(const FluidSetup& setup, const VecField& coords, const std::vector<double>& w);

/// Newton solve. With `warm` the iteration starts from that state; a cold
/// start falls back to an inflow ramp when the full-load iteration fails.
FluidState solve_fluid(const FluidSetup& setup, const VecField& coords, const FluidState* warm = nullptr);

/// Consistent nodal forces exerted by the fluid on the interface (zero off
/// the interface): minus the unmodified momentum residual.
VecField interface_forces(const FluidSetup& setup, const VecField& coords, const FluidState& state);

/// Explicit objective contributions seen by the fluid discipline. The
/// objective is J = J_explicit(w, x) + sum_i d_i . f_i over interface nodes.
struct FluidObjectiveTerms {
  std::vector<double> dJ_dw;  // explicit d J / d w, size 3n, or empty
  VecField dJ_dx;             // explicit d J / d x, or empty
  VecField d;                 // force projection per node, or empty
};

/// Solves J^T Psi = -(dJ/dw)^T with J = jacobian_fluid.
std::vector<double> adjoint_fluid(const FluidSetup& setup, const VecField& coords, const FluidState& state,
                                  const FluidObjectiveTerms& terms);

enum class Formulation { complete, reduced };

/// Partial derivative of the fluid Lagrangian J + Psi^T r with respect to the
/// deformed fluid coordinates, state and adjoint frozen. Reduced mode zeroes
/// the entries of nodes not on a tagged boundary.
VecField fluid_shape_partials(const FluidSetup& setup, const VecField& coords, const FluidState& state,
                              const std::vector<double>& psi, const FluidObjectiveTerms& terms, Formulation mode);

}  // namespace afsi
