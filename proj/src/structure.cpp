#include "afsi/structure.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "afsi/errors.hpp"

namespace afsi {

double MaterialStVK::lame_lambda() const {
  return youngs_modulus * poisson_ratio / ((1.0 + poisson_ratio) * (1.0 - 2.0 * poisson_ratio));
}

double MaterialStVK::lame_mu() const { return youngs_modulus / (2.0 * (1.0 + poisson_ratio)); }

void MaterialStVK::validate() const {
  if (!(youngs_modulus > 0.0) || !std::isfinite(youngs_modulus))
    throw ConfigError("structure: youngs_modulus must be positive");
  if (!(poisson_ratio >= 0.0 && poisson_ratio < 0.5)) throw ConfigError("structure: poisson_ratio must lie in [0, 0.5)");
}

namespace {

using Mat2 = Eigen::Matrix2d;

struct Element {
  double area = 0.0;
  std::array<Eigen::Vector2d, 3> grad;  // shape-function gradients in X
};

Element reference_element(const Vec2& a, const Vec2& b, const Vec2& c) {
  Element e;
  e.area = signed_area(a, b, c);
  const double inv = 1.0 / (2.0 * e.area);
  const std::array<Vec2, 3> p{a, b, c};
  for (int k = 0; k < 3; ++k) {
    const Vec2& q = p[(k + 1) % 3];
    const Vec2& r = p[(k + 2) % 3];
    e.grad[k] = Eigen::Vector2d(q.y - r.y, r.x - q.x) * inv;
  }
  return e;
}

struct Kinematics {
  Mat2 F;
  Mat2 S;
};

Kinematics kinematics(const Element& el, const std::array<Vec2, 3>& ue, double lambda, double mu, int tri) {
  Kinematics k;
  Mat2 H = Mat2::Zero();
  for (int a = 0; a < 3; ++a) H += Eigen::Vector2d(ue[a].x, ue[a].y) * el.grad[a].transpose();
  k.F = Mat2::Identity() + H;
  if (k.F.determinant() <= 0.0) {
    std::ostringstream os;
    os << "structure: element " << tri << " inverted (det F = " << k.F.determinant() << ")";
    throw NonphysicalStateError(os.str());
  }
  // Green-Lagrange strain from the displacement gradient avoids cancellation at small strain.
  const Mat2 E = 0.5 * (H + H.transpose() + H.transpose() * H);
  k.S = lambda * E.trace() * Mat2::Identity() + 2.0 * mu * E;
  return k;
}

std::array<Vec2, 3> element_forces(const Mesh2D& mesh, const VecField& X, const VecField& u, int t, double lambda,
                                   double mu) {
  const auto& tri = mesh.triangles[t];
  const Element el = reference_element(X[tri[0]], X[tri[1]], X[tri[2]]);
  if (el.area <= 0.0) throw NonphysicalStateError("structure: element " + std::to_string(t) + " has non-positive reference area");
  const Kinematics k = kinematics(el, {u[tri[0]], u[tri[1]], u[tri[2]]}, lambda, mu, t);
  const Mat2 P = k.F * k.S;
  std::array<Vec2, 3> f;
  for (int a = 0; a < 3; ++a) {
    Eigen::Vector2d fa = el.area * P * el.grad[a];
    f[a] = {fa(0), fa(1)};
  }
  return f;
}

std::vector<bool> dof_mask(int nodes, const std::vector<int>& dirichlet_nodes) {
  std::vector<bool> fixed(2 * nodes, false);
  for (int n : dirichlet_nodes) fixed[2 * n] = fixed[2 * n + 1] = true;
  return fixed;
}

std::vector<int> free_dofs(const std::vector<bool>& fixed) {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(fixed.size()); ++i)
    if (!fixed[i]) out.push_back(i);
  return out;
}

double free_norm(const std::vector<double>& v, const std::vector<int>& dofs) {
  double s = 0.0;
  for (int i : dofs) s += v[i] * v[i];
  return std::sqrt(s);
}

}  // namespace

VecField internal_forces(const Mesh2D& mesh, const VecField& u, const MaterialStVK& mat) {
  if (u.size() != mesh.nodes.size()) throw ValidationError("structure: displacement size does not match mesh");
  const double lambda = mat.lame_lambda(), mu = mat.lame_mu();
  VecField f(mesh.nodes.size());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    auto fe = element_forces(mesh, mesh.nodes, u, t, lambda, mu);
    for (int a = 0; a < 3; ++a) f[mesh.triangles[t][a]] += fe[a];
  }
  return f;
}

VecField residual_structure(const Mesh2D& mesh, const VecField& u, const VecField& f_ext, const MaterialStVK& mat) {
  if (f_ext.size() != mesh.nodes.size()) throw ValidationError("structure: external force size does not match mesh");
  VecField r = internal_forces(mesh, u, mat);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = f_ext[i] - r[i];
  return r;
}

SparseMatrix tangent_structure(const Mesh2D& mesh, const VecField& u, const MaterialStVK& mat) {
  if (u.size() != mesh.nodes.size()) throw ValidationError("structure: displacement size does not match mesh");
  const double lambda = mat.lame_lambda(), mu = mat.lame_mu();
  std::vector<Triplet> trip;
  trip.reserve(36 * mesh.triangles.size());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Element el = reference_element(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]);
    const Kinematics k = kinematics(el, {u[tri[0]], u[tri[1]], u[tri[2]]}, lambda, mu, t);
    for (int b = 0; b < 3; ++b) {
      for (int kk = 0; kk < 2; ++kk) {
        Mat2 dF = Mat2::Zero();
        dF.row(kk) = el.grad[b].transpose();
        const Mat2 dE = 0.5 * (k.F.transpose() * dF + dF.transpose() * k.F);
        const Mat2 dS = lambda * dE.trace() * Mat2::Identity() + 2.0 * mu * dE;
        const Mat2 dP = dF * k.S + k.F * dS;
        for (int a = 0; a < 3; ++a) {
          Eigen::Vector2d col = el.area * dP * el.grad[a];
          for (int i = 0; i < 2; ++i) trip.push_back({2 * tri[a] + i, 2 * tri[b] + kk, col(i)});
        }
      }
    }
  }
  const int n = 2 * mesh.num_nodes();
  return SparseMatrix::assemble(trip, n, n);
}

namespace {

// Newton iteration towards f_int(u) = f_ext; returns false when the iteration
// fails to converge or hits an inverted element.
bool newton(const Mesh2D& mesh, const VecField& f_ext, const MaterialStVK& mat, const std::vector<int>& dofs,
            const StructureOptions& opts, VecField& u, std::vector<double>& history, int& iterations) {
  const double scale = norm(f_ext);
  const double tol = std::max(opts.newton_rtol * scale, opts.newton_atol);
  for (int it = 0; it <= opts.max_iterations; ++it) {
    std::vector<double> r;
    try {
      r = flatten(residual_structure(mesh, u, f_ext, mat));
    } catch (const NonphysicalStateError&) {
      return false;
    }
    const double rn = free_norm(r, dofs);
    history.push_back(rn);
    if (rn <= tol) return true;
    // Round-off floor: Newton stopped contracting far below the initial residual.
    const std::size_t h = history.size();
    if (h >= 3 && rn <= 1e-8 * std::max(history.front(), scale) && rn > 0.5 * history[h - 2]) return true;
    if (it == opts.max_iterations || !std::isfinite(rn)) return false;
    if (h >= 4 && rn > 1e3 * history.front() + tol) return false;
    SparseMatrix Kf = submatrix(tangent_structure(mesh, u, mat), dofs, dofs);
    std::vector<double> rf(dofs.size());
    for (std::size_t i = 0; i < dofs.size(); ++i) rf[i] = r[dofs[i]];
    std::vector<double> du = solve_direct(Kf, rf);
    auto flat = flatten(u);
    for (std::size_t i = 0; i < dofs.size(); ++i) flat[dofs[i]] += du[i];
    u = unflatten(flat);
    ++iterations;
  }
  return false;
}

}  // namespace

StructureState solve_structure(const Mesh2D& mesh, const VecField& f_ext, const MaterialStVK& mat,
                               const std::vector<int>& dirichlet_nodes, const StructureOptions& opts,
                               const VecField* initial_guess) {
  mat.validate();
  if (dirichlet_nodes.empty()) throw ValidationError("structure: Dirichlet set is empty (rigid-body modes)");
  if (f_ext.size() != mesh.nodes.size()) throw ValidationError("structure: external force size does not match mesh");
  const auto fixed = dof_mask(mesh.num_nodes(), dirichlet_nodes);
  const auto dofs = free_dofs(fixed);

  StructureState st;
  st.f_ext = f_ext;
  std::vector<double> history;
  VecField u0(mesh.nodes.size());
  if (initial_guess && initial_guess->size() == mesh.nodes.size()) {
    u0 = *initial_guess;
    for (int n : dirichlet_nodes) u0[n] = {};
  }
  VecField u = u0;
  if (newton(mesh, f_ext, mat, dofs, opts, u, history, st.newton_iterations)) {
    st.u = u;
  } else {
    bool done = false;
    for (int steps = 2; steps <= opts.max_load_steps && !done; steps *= 2) {
      u = VecField(mesh.nodes.size());
      bool ok = true;
      for (int s = 1; s <= steps && ok; ++s) {
        VecField fs = f_ext;
        for (auto& v : fs) v *= static_cast<double>(s) / steps;
        ok = newton(mesh, fs, mat, dofs, opts, u, history, st.newton_iterations);
      }
      done = ok;
    }
    if (!done) throw ConvergenceError("structure: Newton iteration did not converge", history);
    st.u = u;
  }
  st.f_int = internal_forces(mesh, st.u, mat);
  return st;
}

VecField adjoint_structure(const Mesh2D& mesh, const VecField& u, const MaterialStVK& mat,
                           const std::vector<int>& dirichlet_nodes, const VecField& rhs) {
  if (rhs.size() != mesh.nodes.size()) throw ValidationError("structure: adjoint right-hand side size does not match mesh");
  const auto dofs = free_dofs(dof_mask(mesh.num_nodes(), dirichlet_nodes));
  const auto b = flatten(rhs);
  std::vector<double> bf(dofs.size());
  for (std::size_t i = 0; i < dofs.size(); ++i) bf[i] = b[dofs[i]];
  std::vector<double> psi_f(dofs.size(), 0.0);
  if (norm2(bf) > 0.0) psi_f = solve_transpose(submatrix(tangent_structure(mesh, u, mat), dofs, dofs), bf);
  std::vector<double> psi(2 * mesh.nodes.size(), 0.0);
  for (std::size_t i = 0; i < dofs.size(); ++i) psi[dofs[i]] = psi_f[i];
  return unflatten(psi);
}

VecField shape_sens_structure(const Mesh2D& mesh, const VecField& u, const VecField& psi, const MaterialStVK& mat,
                              const StructureOptions& opts) {
  if (psi.size() != mesh.nodes.size()) throw ValidationError("structure: adjoint size does not match mesh");
  const double lambda = mat.lame_lambda(), mu = mat.lame_mu();
  const auto h = local_edge_length(mesh, mesh.nodes);
  VecField g(mesh.nodes.size());
  VecField X = mesh.nodes;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    if (psi[tri[0]] == Vec2{} && psi[tri[1]] == Vec2{} && psi[tri[2]] == Vec2{}) continue;
    for (int b = 0; b < 3; ++b) {
      const int node = tri[b];
      const double step = opts.fd_step_factor * h[node];
      for (int k = 0; k < 2; ++k) {
        const double x0 = X[node][k];
        X[node][k] = x0 + step;
        const auto fp = element_forces(mesh, X, u, t, lambda, mu);
        X[node][k] = x0 - step;
        const auto fm = element_forces(mesh, X, u, t, lambda, mu);
        X[node][k] = x0;
        double s = 0.0;
        for (int a = 0; a < 3; ++a) s += dot(psi[tri[a]], fp[a] - fm[a]);
        // r = f_ext - f_int, so d(Psi^T r)/dX = -Psi^T d f_int / dX.
        g[node][k] -= s / (2.0 * step);
      }
    }
  }
  return g;
}

}  // namespace afsi
