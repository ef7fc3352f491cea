#pragma once

#include <vector>

#include "afsi/meshkit.hpp"
#include "afsi/numkit.hpp"

namespace afsi {

struct MaterialStVK {
  double youngs_modulus = 1.0;
  double poisson_ratio = 0.3;
  double density = 1.0;

  double lame_lambda() const;
  double lame_mu() const;
  /// Throws ConfigError on E <= 0 or nu outside [0, 0.5).
  void validate() const;
};

struct StructureState {
  VecField u;
  VecField f_int;
  VecField f_ext;
  int newton_iterations = 0;
};

struct StructureOptions {
  double newton_rtol = 1e-10;
  double newton_atol = 1e-12;
  int max_iterations = 30;
  /// Maximum number of load increments tried when a full-load Newton solve fails.
  int max_load_steps = 16;
  /// Semi-analytic shape partials: step = fd_step_factor * local edge length.
  double fd_step_factor = 1e-6;
};

/// Nodal internal forces f^int(u, X) of the St. Venant-Kirchhoff plane-strain
/// model on linear triangles. Throws NonphysicalStateError when det F <= 0.
VecField internal_forces(const Mesh2D& mesh, const VecField& u, const MaterialStVK& mat);

/// r = f_ext - f_int, without boundary-condition modification.
VecField residual_structure(const Mesh2D& mesh, const VecField& u, const VecField& f_ext,
                            const MaterialStVK& mat);

/// Consistent tangent K = d f_int / d u (material plus geometric stiffness)
/// over the flattened layout [x0, y0, x1, y1, ...]. The residual Jacobian is -K.
SparseMatrix tangent_structure(const Mesh2D& mesh, const VecField& u, const MaterialStVK& mat);

/// Newton solve of f_int(u) = f_ext with u = 0 on `dirichlet_nodes`. Falls
/// back to load stepping when the full-load iteration fails. Throws
/// ConvergenceError with the residual history on failure.
StructureState solve_structure(const Mesh2D& mesh, const VecField& f_ext, const MaterialStVK& mat,
                               const std::vector<int>& dirichlet_nodes, const StructureOptions& opts = {},
                               const VecField* initial_guess = nullptr);

/// Solves the structural adjoint equation dJ/du + Psi^T dr/du = 0, i.e.
/// K^T Psi = rhs with rhs = (dJ/du)^T. Psi vanishes on Dirichlet nodes.
VecField adjoint_structure(const Mesh2D& mesh, const VecField& u, const MaterialStVK& mat,
                           const std::vector<int>& dirichlet_nodes, const VecField& rhs);

/// d/dX of Psi^T r(u, X) with u and Psi frozen, by central differences of the
/// element internal forces. External forces do not depend on X.
VecField shape_sens_structure(const Mesh2D& mesh, const VecField& u, const VecField& psi,
                              const MaterialStVK& mat, const StructureOptions& opts = {});

}  // namespace afsi
