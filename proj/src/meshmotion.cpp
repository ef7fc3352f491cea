#include "afsi/meshmotion.hpp"

#include <cmath>
#include <sstream>

#include "afsi/errors.hpp"

namespace afsi {

void PseudoElasticParams::validate() const {
  if (!(lame_mu > 0.0)) throw ConfigError("meshmotion: lame_mu must be positive");
  if (!(lame_lambda >= 0.0)) throw ConfigError("meshmotion: lame_lambda must be non-negative");
  if (!std::isfinite(stiffening_exponent)) throw ConfigError("meshmotion: stiffening_exponent must be finite");
}

namespace {

// Element stiffness (row-major 6x6, local dof 2a+i) in configuration x.
void element_stiffness(const std::array<Vec2, 3>& x, const PseudoElasticParams& prm, int tri, double* K) {
  const double A = signed_area(x[0], x[1], x[2]);
  if (A <= 0.0) throw NonphysicalStateError("meshmotion: element " + std::to_string(tri) + " has non-positive area");
  std::array<Vec2, 3> b;
  for (int k = 0; k < 3; ++k) {
    const Vec2& q = x[(k + 1) % 3];
    const Vec2& s = x[(k + 2) % 3];
    b[k] = Vec2{q.y - s.y, s.x - q.x} * (1.0 / (2.0 * A));
  }
  const double scale = A * std::pow(A, -prm.stiffening_exponent);
  const double lam = prm.lame_lambda, mu = prm.lame_mu;
  for (int a = 0; a < 3; ++a)
    for (int i = 0; i < 2; ++i)
      for (int c = 0; c < 3; ++c)
        for (int k = 0; k < 2; ++k)
          K[(2 * a + i) * 6 + 2 * c + k] =
              scale * (lam * b[a][i] * b[c][k] + mu * ((i == k ? dot(b[a], b[c]) : 0.0) + b[a][k] * b[c][i]));
}

}  // namespace

MeshMotion::MeshMotion(const Mesh2D& mesh, PseudoElasticParams params, std::string interface_tag)
    : mesh_(&mesh), params_(params) {
  params_.validate();
  const int n = mesh.num_nodes();
  is_interface_.assign(n, false);
  is_boundary_.assign(n, false);
  interface_ = mesh.nodes_with_tag(interface_tag);
  for (int node : interface_) is_interface_[node] = true;
  for (int node : mesh.boundary_nodes()) is_boundary_[node] = true;
  for (int node = 0; node < n; ++node) {
    auto& list = is_boundary_[node] ? boundary_ : interior_;
    list.push_back(node);
    auto& dofs = is_boundary_[node] ? boundary_dofs_ : interior_dofs_;
    dofs.push_back(2 * node);
    dofs.push_back(2 * node + 1);
  }
  std::vector<Triplet> trip;
  trip.reserve(36 * mesh.triangles.size());
  double ke[36];
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    element_stiffness({mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]}, params_, t, ke);
    for (int a = 0; a < 3; ++a)
      for (int i = 0; i < 2; ++i)
        for (int c = 0; c < 3; ++c)
          for (int k = 0; k < 2; ++k) trip.push_back({2 * tri[a] + i, 2 * tri[c] + k, ke[(2 * a + i) * 6 + 2 * c + k]});
  }
  K_ = SparseMatrix::assemble(trip, 2 * n, 2 * n);
  K_ii_ = submatrix(K_, interior_dofs_, interior_dofs_);
  K_ib_ = submatrix(K_, interior_dofs_, boundary_dofs_);
  if (!interior_dofs_.empty()) lu_ = std::make_shared<LuSolver>(K_ii_);
}

VecField MeshMotion::solve(const VecField& interface_displacement) const {
  const int n = mesh_->num_nodes();
  if (static_cast<int>(interface_displacement.size()) != n)
    throw ValidationError("meshmotion: interface displacement size does not match mesh");
  VecField u(n);
  for (int node : interface_) u[node] = interface_displacement[node];
  if (lu_) {
    const auto flat = flatten(u);
    std::vector<double> ub(boundary_dofs_.size());
    for (std::size_t k = 0; k < ub.size(); ++k) ub[k] = flat[boundary_dofs_[k]];
    auto rhs = K_ib_.apply(ub);
    for (auto& v : rhs) v = -v;
    auto ui = lu_->solve(rhs);
    for (std::size_t k = 0; k < interior_dofs_.size(); ++k) u[interior_dofs_[k] / 2][interior_dofs_[k] % 2] = ui[k];
  }
  const double amin = min_area(*mesh_, deformed(*mesh_, u));
  if (amin <= 0.0) {
    std::ostringstream os;
    os << "meshmotion: deformed fluid mesh is tangled (minimum element area " << amin << ")";
    throw MeshTanglingError(os.str(), amin);
  }
  return u;
}

VecField MeshMotion::residual(const VecField& u, const VecField& interface_displacement) const {
  auto f = unflatten(K_.apply(flatten(u)));
  VecField r(u.size());
  for (int node : interior_) r[node] = -f[node];
  for (int node : boundary_) r[node] = (is_interface_[node] ? interface_displacement[node] : Vec2{}) - u[node];
  return r;
}

VecField MeshMotion::adjoint_complete(const VecField& f_ma) const {
  if (f_ma.size() != mesh_->nodes.size()) throw ValidationError("meshmotion: adjoint force size does not match mesh");
  const auto f = flatten(f_ma);
  std::vector<double> fi(interior_dofs_.size()), psi_i(interior_dofs_.size(), 0.0);
  for (std::size_t k = 0; k < fi.size(); ++k) fi[k] = f[interior_dofs_[k]];
  if (lu_ && norm2(fi) > 0.0) psi_i = lu_->solve_transpose(fi);
  auto kt = K_ib_.apply_transpose(psi_i);
  std::vector<double> psi(f.size(), 0.0);
  for (std::size_t k = 0; k < interior_dofs_.size(); ++k) psi[interior_dofs_[k]] = psi_i[k];
  for (std::size_t k = 0; k < boundary_dofs_.size(); ++k) psi[boundary_dofs_[k]] = f[boundary_dofs_[k]] - kt[k];
  return unflatten(psi);
}

VecField MeshMotion::adjoint_reduced(const VecField& f_ma) const {
  if (f_ma.size() != mesh_->nodes.size()) throw ValidationError("meshmotion: adjoint force size does not match mesh");
  VecField psi(f_ma.size());
  for (int node : boundary_) psi[node] = f_ma[node];
  return psi;
}

VecField MeshMotion::shape_sens(const VecField& u, const VecField& psi, double fd_step_factor) const {
  const Mesh2D& mesh = *mesh_;
  VecField g(mesh.nodes.size());
  const auto h = local_edge_length(mesh, mesh.nodes);
  double kp[36], km[36];
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    // Only interior rows carry -f_int; boundary rows do not depend on X.
    double w[6] = {};
    bool any = false;
    for (int a = 0; a < 3; ++a)
      if (!is_boundary_[tri[a]]) {
        w[2 * a] = -psi[tri[a]].x;
        w[2 * a + 1] = -psi[tri[a]].y;
        any = any || w[2 * a] != 0.0 || w[2 * a + 1] != 0.0;
      }
    if (!any) continue;
    double ue[6];
    for (int a = 0; a < 3; ++a) {
      ue[2 * a] = u[tri[a]].x;
      ue[2 * a + 1] = u[tri[a]].y;
    }
    std::array<Vec2, 3> x{mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]};
    for (int c = 0; c < 3; ++c) {
      const double step = fd_step_factor * h[tri[c]];
      for (int k = 0; k < 2; ++k) {
        const double x0 = x[c][k];
        x[c][k] = x0 + step;
        element_stiffness(x, params_, t, kp);
        x[c][k] = x0 - step;
        element_stiffness(x, params_, t, km);
        x[c][k] = x0;
        double s = 0.0;
        for (int r = 0; r < 6; ++r)
          for (int q = 0; q < 6; ++q) s += w[r] * (kp[r * 6 + q] - km[r * 6 + q]) * ue[q];
        g[tri[c]][k] += s / (2.0 * step);
      }
    }
  }
  return g;
}

}  // namespace afsi
