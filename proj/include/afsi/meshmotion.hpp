#pragma once

#include <memory>
#include <string>
#include <vector>

#include "afsi/meshkit.hpp"
#include "afsi/numkit.hpp"

namespace afsi {

struct PseudoElasticParams {
  double lame_lambda = 0.0;
  double lame_mu = 1.0;
  /// Element stiffness is scaled by (1 / area)^exponent; 0 gives plain linear elasticity.
  double stiffening_exponent = 1.0;

  void validate() const;
};

/// Pseudo-linear-elastic motion of the fluid mesh on its undeformed
/// configuration. Every boundary node is a Dirichlet node: interface nodes
/// follow the prescribed displacement, all others stay fixed.
///
/// Residual: r_interior = -(K u)_interior, r_boundary = u_bar - u_boundary.
class MeshMotion {
public:
  MeshMotion(const Mesh2D& mesh, PseudoElasticParams params, std::string interface_tag = "interface");

  const Mesh2D& mesh() const { return *mesh_; }
  const std::vector<int>& interior_nodes() const { return interior_; }
  const std::vector<int>& boundary_nodes() const { return boundary_; }
  const std::vector<int>& interface_nodes() const { return interface_; }
  const SparseMatrix& stiffness() const { return K_; }

  /// Mesh displacement for the given interface displacement (entries off the
  /// interface are ignored). Throws MeshTanglingError when an element of
  /// X + u has non-positive area.
  VecField solve(const VecField& interface_displacement) const;

  /// Mesh-motion residual for displacement u and interface data u_bar.
  VecField residual(const VecField& u, const VecField& interface_displacement) const;

  /// Complete adjoint: interior block solve K_ii^T psi_i = f_i, then
  /// psi_b = f_b - K_ib^T psi_i.
  VecField adjoint_complete(const VecField& f_ma) const;
  /// Reduced adjoint: interior zeros, boundary entries copied.
  VecField adjoint_reduced(const VecField& f_ma) const;

  /// d(Psi^T r)/dX with u and Psi frozen, by central differences of the
  /// element stiffness terms.
  VecField shape_sens(const VecField& u, const VecField& psi, double fd_step_factor = 1e-6) const;

private:
  const Mesh2D* mesh_;
  PseudoElasticParams params_;
  std::vector<int> interior_, boundary_, interface_;
  std::vector<bool> is_interface_, is_boundary_;
  std::vector<int> interior_dofs_, boundary_dofs_;
  SparseMatrix K_, K_ii_, K_ib_;
  std::shared_ptr<LuSolver> lu_;
};

}  // namespace afsi
