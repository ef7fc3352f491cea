#include "afsi/fluid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "afsi/errors.hpp"

namespace afsi {

void FlowParams::validate() const {
  if (!(density > 0.0) || !(viscosity > 0.0) || !std::isfinite(density) || !std::isfinite(viscosity))
    throw ConfigError("fluid: density and viscosity must be positive");
}

Vec2 InflowProfile::velocity(const Vec2& x) const {
  return {v_max * std::sin(std::numbers::pi * (x.y - y0) / height), 0.0};
}

double InflowProfile::slope(const Vec2& x) const {
  return v_max * std::numbers::pi / height * std::cos(std::numbers::pi * (x.y - y0) / height);
}

VecField FluidState::velocities() const {
  VecField v(w.size() / 3);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = velocity(static_cast<int>(i));
  return v;
}

std::vector<double> FluidState::pressures() const {
  std::vector<double> p(w.size() / 3);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = pressure(static_cast<int>(i));
  return p;
}

namespace {

constexpr double kThird = 1.0 / 3.0;

double quad_shape(int a, int q) { return a == q ? 2.0 / 3.0 : 1.0 / 6.0; }

// P1/P1 SUPG/PSPG element. Local unknown 3a+c holds (vx, vy, p) of vertex a.
// r receives 9 entries; K (row-major 9x9) the analytic derivative when non-null.
void fluid_element(const std::array<Vec2, 3>& x, const double* w, const FlowParams& prm, int tri, double* r,
                   double* K) {
  const double A = signed_area(x[0], x[1], x[2]);
  if (A <= 0.0) {
    std::ostringstream os;
    os << "fluid: element " << tri << " inverted (area " << A << ")";
    throw NonphysicalStateError(os.str());
  }
  const double rho = prm.density, mu = prm.viscosity, nu = mu / rho;
  const bool conv = !prm.stokes;
  std::array<Vec2, 3> b, v;
  std::array<double, 3> p;
  for (int k = 0; k < 3; ++k) {
    const Vec2& q = x[(k + 1) % 3];
    const Vec2& s = x[(k + 2) % 3];
    b[k] = Vec2{q.y - s.y, s.x - q.x} * (1.0 / (2.0 * A));
    v[k] = {w[3 * k], w[3 * k + 1]};
    p[k] = w[3 * k + 2];
  }
  double G[2][2] = {{0, 0}, {0, 0}};
  Vec2 gp, vc;
  for (int a = 0; a < 3; ++a) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) G[i][j] += v[a][i] * b[a][j];
    gp += p[a] * b[a];
    vc += kThird * v[a];
  }
  const double pbar = kThird * (p[0] + p[1] + p[2]);
  const double h = 2.0 * std::sqrt(A / std::numbers::pi);
  const double speed = norm(vc);
  const double tau = conv ? 1.0 / (4.0 * nu / (h * h) + 2.0 * speed / h) : h * h / (4.0 * nu);
  // d tau / d v_bk is the same for every vertex b.
  Vec2 dtau;
  if (conv && speed > 0.0) dtau = vc * (-tau * tau * (2.0 / h) / (3.0 * speed));

  auto Gv = [&](const Vec2& u) { return Vec2{G[0][0] * u.x + G[0][1] * u.y, G[1][0] * u.x + G[1][1] * u.y}; };

  std::fill(r, r + 9, 0.0);
  if (K) std::fill(K, K + 81, 0.0);

  for (int q = 0; q < 3; ++q) {
    Vec2 vq;
    for (int a = 0; a < 3; ++a) vq += quad_shape(a, q) * v[a];
    const Vec2 cq = conv ? Gv(vq) : Vec2{};
    const Vec2 Rq = rho * cq + gp;
    const double wq = A * kThird;
    for (int a = 0; a < 3; ++a) {
      const double na = quad_shape(a, q);
      const double sa = conv ? dot(vq, b[a]) : 0.0;
      for (int i = 0; i < 2; ++i) r[3 * a + i] += wq * (na * rho * cq[i] + tau * sa * Rq[i]);
      if (!K) continue;
      for (int bb = 0; bb < 3; ++bb) {
        const double nb = quad_shape(bb, q);
        for (int i = 0; i < 2; ++i) {
          double* row = K + (3 * a + i) * 9 + 3 * bb;
          for (int k = 0; k < 2; ++k) {
            double dconv = 0.0;
            if (conv) dconv = (i == k ? dot(b[bb], vq) : 0.0) + G[i][k] * nb;
            double val = na * rho * dconv + tau * sa * rho * dconv + dtau[k] * sa * Rq[i];
            if (conv) val += tau * nb * b[a][k] * Rq[i];
            row[k] += wq * val;
          }
          row[2] += wq * tau * sa * b[bb][i];
        }
      }
    }
  }

  const Vec2 Rc = (conv ? rho * Gv(vc) : Vec2{}) + gp;
  const double trG = G[0][0] + G[1][1];
  for (int a = 0; a < 3; ++a) {
    for (int i = 0; i < 2; ++i) {
      double visc = 0.0;
      for (int j = 0; j < 2; ++j) visc += b[a][j] * (G[i][j] + G[j][i]);
      r[3 * a + i] += A * (mu * visc - b[a][i] * pbar);
    }
    r[3 * a + 2] = A * kThird * trG + tau / rho * A * dot(b[a], Rc);
    if (!K) continue;
    for (int bb = 0; bb < 3; ++bb) {
      const double ab = dot(b[a], b[bb]);
      for (int i = 0; i < 2; ++i) {
        double* row = K + (3 * a + i) * 9 + 3 * bb;
        for (int k = 0; k < 2; ++k) row[k] += A * mu * ((i == k ? ab : 0.0) + b[a][k] * b[bb][i]);
        row[2] -= A * b[a][i] * kThird;
      }
      double* crow = K + (3 * a + 2) * 9 + 3 * bb;
      for (int k = 0; k < 2; ++k) {
        double val = A * kThird * b[bb][k] + dtau[k] / rho * A * dot(b[a], Rc);
        if (conv) val += tau * A * (b[a][k] * dot(b[bb], vc) + (b[a][0] * G[0][k] + b[a][1] * G[1][k]) * kThird);
        crow[k] += val;
      }
      crow[2] += tau / rho * A * ab;
    }
  }
}

void gather(const Mesh2D& mesh, const VecField& coords, const std::vector<double>& w, int t,
            std::array<Vec2, 3>& x, double* we) {
  const auto& tri = mesh.triangles[t];
  for (int a = 0; a < 3; ++a) {
    x[a] = coords[tri[a]];
    for (int c = 0; c < 3; ++c) we[3 * a + c] = w[3 * tri[a] + c];
  }
}

void check_sizes(const FluidSetup& setup, const VecField& coords, const std::vector<double>* w) {
  if (!setup.mesh) throw ValidationError("fluid: setup has no mesh");
  if (coords.size() != setup.mesh->nodes.size()) throw ValidationError("fluid: coordinate count does not match mesh");
  if (w && w->size() != 3 * setup.mesh->nodes.size()) throw ValidationError("fluid: state size does not match mesh");
}

}  // namespace

FluidDofs fluid_dofs(const FluidSetup& setup, const VecField& coords) {
  const Mesh2D& mesh = *setup.mesh;
  const int n = mesh.num_nodes();
  FluidDofs d;
  d.dirichlet.assign(3 * n, false);
  d.value.assign(3 * n, 0.0);
  d.interface.assign(n, false);
  d.inlet.assign(n, false);
  d.boundary.assign(n, false);
  for (int node : mesh.boundary_nodes()) d.boundary[node] = true;
  d.interface_nodes = mesh.nodes_with_tag(setup.bc.interface_tag);
  for (int node : d.interface_nodes) d.interface[node] = true;
  std::vector<bool> noslip(d.interface);
  for (const auto& tag : setup.bc.wall_tags)
    for (int node : mesh.nodes_with_tag(tag)) noslip[node] = true;
  for (int node : mesh.nodes_with_tag(setup.bc.inlet_tag)) {
    if (noslip[node]) continue;
    d.inlet[node] = true;
    Vec2 vin = setup.bc.inflow.velocity(coords[node]);
    d.dirichlet[3 * node] = d.dirichlet[3 * node + 1] = true;
    d.value[3 * node] = vin.x;
    d.value[3 * node + 1] = vin.y;
  }
  for (int node = 0; node < n; ++node)
    if (noslip[node]) d.dirichlet[3 * node] = d.dirichlet[3 * node + 1] = true;
  if (!mesh.has_tag(setup.bc.outlet_tag)) {
    auto bnodes = mesh.boundary_nodes();
    d.pinned_pressure = bnodes.empty() ? 0 : bnodes.front();
    d.dirichlet[3 * d.pinned_pressure + 2] = true;
  }
  return d;
}

std::vector<double> residual_fluid_unmodified(const FluidSetup& setup, const VecField& coords,
                                              const std::vector<double>& w) {
  check_sizes(setup, coords, &w);
  const Mesh2D& mesh = *setup.mesh;
  std::vector<double> r(w.size(), 0.0);
  std::array<Vec2, 3> x;
  double we[9], re[9];
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    gather(mesh, coords, w, t, x, we);
    fluid_element(x, we, setup.params, t, re, nullptr);
    const auto& tri = mesh.triangles[t];
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c) r[3 * tri[a] + c] += re[3 * a + c];
  }
  return r;
}

SparseMatrix jacobian_fluid_unmodified(const FluidSetup& setup, const VecField& coords, const std::vector<double>& w) {
  check_sizes(setup, coords, &w);
  const Mesh2D& mesh = *setup.mesh;
  std::vector<Triplet> trip;
  trip.reserve(81 * mesh.triangles.size());
  std::array<Vec2, 3> x;
  double we[9], re[9], ke[81];
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    gather(mesh, coords, w, t, x, we);
    fluid_element(x, we, setup.params, t, re, ke);
    const auto& tri = mesh.triangles[t];
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c)
        for (int bb = 0; bb < 3; ++bb)
          for (int k = 0; k < 3; ++k)
            trip.push_back({3 * tri[a] + c, 3 * tri[bb] + k, ke[(3 * a + c) * 9 + 3 * bb + k]});
  }
  const int n = static_cast<int>(w.size());
  return SparseMatrix::assemble(trip, n, n);
}

std::vector<double> residual_fluid(const FluidSetup& setup, const VecField& coords, const std::vector<double>& w,
                                   double inflow_scale) {
  auto r = residual_fluid_unmodified(setup, coords, w);
  const auto d = fluid_dofs(setup, coords);
  for (std::size_t i = 0; i < r.size(); ++i)
    if (d.dirichlet[i]) r[i] = w[i] - inflow_scale * d.value[i];
  return r;
}

namespace {

SparseMatrix apply_dirichlet_rows(const SparseMatrix& J, const FluidDofs& d) {
  std::vector<Triplet> trip;
  trip.reserve(J.nonzeros());
  for (const auto& t : J.triplets())
    if (!d.dirichlet[t.row]) trip.push_back(t);
  for (int i = 0; i < J.rows(); ++i)
    if (d.dirichlet[i]) trip.push_back({i, i, 1.0});
  return SparseMatrix::assemble(trip, J.rows(), J.cols());
}

}  // namespace

SparseMatrix jacobian_fluid(const FluidSetup& setup, const VecField& coords, const std::vector<double>& w) {
  return apply_dirichlet_rows(jacobian_fluid_unmodified(setup, coords, w), fluid_dofs(setup, coords));
}

namespace {

bool fluid_newton(const FluidSetup& setup, const VecField& coords, const FluidDofs& dofs, double scale,
                  std::vector<double>& w, FluidState& st) {
  const auto& o = setup.opts;
  double ref = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (dofs.dirichlet[i]) ref += dofs.value[i] * dofs.value[i];
  ref = std::max(std::sqrt(ref), 1e-300);
  const double tol = std::max(o.newton_rtol * ref, o.newton_atol);
  std::vector<double> hist;
  for (int it = 0; it <= o.max_iterations; ++it) {
    std::vector<double> r;
    try {
      r = residual_fluid_unmodified(setup, coords, w);
    } catch (const NonphysicalStateError&) {
      return false;
    }
    for (std::size_t i = 0; i < r.size(); ++i)
      if (dofs.dirichlet[i]) r[i] = w[i] - scale * dofs.value[i];
    const double rn = norm2(r);
    hist.push_back(rn);
    st.residual_history.push_back(rn);
    if (rn <= tol) return true;
    const std::size_t h = hist.size();
    if (h >= 3 && rn <= 1e-8 * std::max(hist.front(), ref) && rn > 0.5 * hist[h - 2]) return true;
    if (it == o.max_iterations || !std::isfinite(rn)) return false;
    if (h >= 3 && rn > 1e4 * std::max(hist.front(), ref)) return false;
    auto J = apply_dirichlet_rows(jacobian_fluid_unmodified(setup, coords, w), dofs);
    auto dw = solve_direct(J, r);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= dw[i];
    ++st.newton_iterations;
  }
  return false;
}

}  // namespace

FluidState solve_fluid(const FluidSetup& setup, const VecField& coords, const FluidState* warm) {
  check_sizes(setup, coords, nullptr);
  setup.params.validate();
  if (min_area(*setup.mesh, coords) <= 0.0) throw NonphysicalStateError("fluid: deformed mesh has inverted elements");
  const auto dofs = fluid_dofs(setup, coords);
  const std::size_t n = 3 * setup.mesh->nodes.size();
  FluidState st;
  std::vector<double> w(n, 0.0);
  if (warm && warm->w.size() == n) {
    w = warm->w;
    if (fluid_newton(setup, coords, dofs, 1.0, w, st)) {
      st.w = std::move(w);
      return st;
    }
  }
  w.assign(n, 0.0);
  if (fluid_newton(setup, coords, dofs, 1.0, w, st)) {
    st.w = std::move(w);
    return st;
  }
  for (int steps = 2; steps <= std::max(2, setup.opts.max_ramp_steps); ++steps) {
    w.assign(n, 0.0);
    bool ok = true;
    for (int s = 1; s <= steps && ok; ++s) ok = fluid_newton(setup, coords, dofs, static_cast<double>(s) / steps, w, st);
    if (ok) {
      st.w = std::move(w);
      return st;
    }
  }
  throw ConvergenceError("fluid: Newton iteration did not converge (inflow ramp exhausted)", st.residual_history);
}

VecField interface_forces(const FluidSetup& setup, const VecField& coords, const FluidState& state) {
  auto r = residual_fluid_unmodified(setup, coords, state.w);
  VecField f(setup.mesh->nodes.size());
  for (int node : setup.mesh->nodes_with_tag(setup.bc.interface_tag)) f[node] = {-r[3 * node], -r[3 * node + 1]};
  return f;
}

std::vector<double> adjoint_fluid(const FluidSetup& setup, const VecField& coords, const FluidState& state,
                                  const FluidObjectiveTerms& terms) {
  check_sizes(setup, coords, &state.w);
  const std::size_t n = state.w.size();
  const auto dofs = fluid_dofs(setup, coords);
  std::vector<double> rhs(n, 0.0);
  if (!terms.dJ_dw.empty()) {
    if (terms.dJ_dw.size() != n) throw ValidationError("fluid: objective derivative size does not match state");
    for (std::size_t i = 0; i < n; ++i) rhs[i] = -terms.dJ_dw[i];
  }
  const SparseMatrix Ju = jacobian_fluid_unmodified(setup, coords, state.w);
  if (!terms.d.empty()) {
    if (terms.d.size() != setup.mesh->nodes.size()) throw ValidationError("fluid: force projection size does not match mesh");
    // J contains d . f with f = -r_unmodified on interface momentum rows.
    std::vector<double> dv(n, 0.0);
    for (int node : dofs.interface_nodes) {
      dv[3 * node] = terms.d[node].x;
      dv[3 * node + 1] = terms.d[node].y;
    }
    auto jt = Ju.apply_transpose(dv);
    for (std::size_t i = 0; i < n; ++i) rhs[i] += jt[i];
  }
  if (norm2(rhs) == 0.0) return std::vector<double>(n, 0.0);
  return solve_transpose(apply_dirichlet_rows(Ju, dofs), rhs);
}

VecField fluid_shape_partials(const FluidSetup& setup, const VecField& coords, const FluidState& state,
                              const std::vector<double>& psi, const FluidObjectiveTerms& terms, Formulation mode) {
  check_sizes(setup, coords, &state.w);
  const Mesh2D& mesh = *setup.mesh;
  const std::size_t n = state.w.size();
  if (psi.size() != n) throw ValidationError("fluid: adjoint size does not match state");
  const auto dofs = fluid_dofs(setup, coords);

  // Weights of the element residual rows in J + Psi^T r: Psi on free rows,
  // minus the force projection on interface momentum rows.
  std::vector<double> W(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (!dofs.dirichlet[i]) W[i] = psi[i];
  if (!terms.d.empty())
    for (int node : dofs.interface_nodes) {
      W[3 * node] -= terms.d[node].x;
      W[3 * node + 1] -= terms.d[node].y;
    }

  VecField g(mesh.nodes.size());
  if (!terms.dJ_dx.empty()) {
    if (terms.dJ_dx.size() != g.size()) throw ValidationError("fluid: objective shape derivative size does not match mesh");
    g = terms.dJ_dx;
  }
  const auto hloc = local_edge_length(mesh, coords);
  std::array<Vec2, 3> x;
  double we[9], rp[9], rm[9];
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    double wsum = 0.0;
    double Wl[9];
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c) {
        Wl[3 * a + c] = W[3 * tri[a] + c];
        wsum += std::abs(Wl[3 * a + c]);
      }
    if (wsum == 0.0) continue;
    gather(mesh, coords, state.w, t, x, we);
    for (int a = 0; a < 3; ++a) {
      const double step = setup.opts.fd_step_factor * hloc[tri[a]];
      for (int k = 0; k < 2; ++k) {
        const double x0 = x[a][k];
        x[a][k] = x0 + step;
        fluid_element(x, we, setup.params, t, rp, nullptr);
        x[a][k] = x0 - step;
        fluid_element(x, we, setup.params, t, rm, nullptr);
        x[a][k] = x0;
        double s = 0.0;
        for (int m = 0; m < 9; ++m) s += Wl[m] * (rp[m] - rm[m]);
        g[tri[a]][k] += s / (2.0 * step);
      }
    }
  }
  // Inflow rows read w - v_bar(x); only v_x depends on y.
  for (int node = 0; node < mesh.num_nodes(); ++node)
    if (dofs.inlet[node]) g[node].y -= psi[3 * node] * setup.bc.inflow.slope(coords[node]);

  if (mode == Formulation::reduced)
    for (int node = 0; node < mesh.num_nodes(); ++node)
      if (!dofs.boundary[node]) g[node] = {};
  return g;
}

}  // namespace afsi
