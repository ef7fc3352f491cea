#include "afsi/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>

#include "afsi/errors.hpp"

namespace afsi {

FsiSystem::FsiSystem(FsiProblem problem) : problem_(std::move(problem)) {
  problem_.flow.validate();
  problem_.material.validate();
  problem_.mesh_params.validate();
  fluid_.mesh = &problem_.fluid_mesh;
  fluid_.params = problem_.flow;
  fluid_.bc = problem_.fluid_bc;
  fluid_.bc.interface_tag = problem_.interface_tag;
  fluid_.opts = problem_.fluid_opts;
  mesh_motion_ = std::make_unique<MeshMotion>(problem_.fluid_mesh, problem_.mesh_params, problem_.interface_tag);
  maps_ = build_interface_maps(problem_.fluid_mesh, problem_.structure_mesh, problem_.mapping, problem_.force_mode,
                               problem_.interface_tag);
  if (!problem_.structure_mesh.has_tag(problem_.dirichlet_tag))
    throw ValidationError("structure mesh has no boundary tagged '" + problem_.dirichlet_tag + "'");
  dirichlet_ = problem_.structure_mesh.nodes_with_tag(problem_.dirichlet_tag);
  structure_interface_ = problem_.structure_mesh.nodes_with_tag(problem_.interface_tag);
  fluid_interface_ = problem_.fluid_mesh.nodes_with_tag(problem_.interface_tag);
}

void CouplingConfig::validate() const {
  if (!(tolerance > 0)) throw ConfigError("coupling tolerance must be positive");
  if (!(adjoint_tolerance > 0)) throw ConfigError("adjoint tolerance must be positive");
  if (max_iterations < 1) throw ConfigError("coupling max_iterations must be at least 1");
  if (!(aitken_initial > 0 && aitken_initial <= 1)) throw ConfigError("aitken initial relaxation must lie in (0, 1]");
  if (!(omega_min > 0 && omega_min <= omega_max)) throw ConfigError("aitken bounds must satisfy 0 < min <= max");
}

double aitken_update(const std::vector<double>& delta_prev, const std::vector<double>& delta_curr, double omega_prev,
                     double omega_min, double omega_max) {
  if (delta_prev.size() != delta_curr.size()) throw ValidationError("aitken: residual sizes differ");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < delta_curr.size(); ++i) {
    const double diff = delta_curr[i] - delta_prev[i];
    num += delta_prev[i] * diff;
    den += diff * diff;
  }
  if (den == 0.0) {
    if (norm2(delta_curr) == 0.0) return omega_prev;
    throw ConvergenceError("aitken relaxation stagnated: residual unchanged between iterations", {norm2(delta_curr)});
  }
  return std::clamp(-omega_prev * num / den, omega_min, omega_max);
}

namespace {

std::vector<double> gather(const VecField& f, const std::vector<int>& nodes) {
  std::vector<double> out;
  out.reserve(2 * nodes.size());
  for (int i : nodes) {
    out.push_back(f[i].x);
    out.push_back(f[i].y);
  }
  return out;
}

void scatter_add(VecField& f, const std::vector<int>& nodes, const std::vector<double>& v, double scale) {
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    f[nodes[k]].x += scale * v[2 * k];
    f[nodes[k]].y += scale * v[2 * k + 1];
  }
}

template <class Fn>
auto with_context(int iteration, const std::vector<double>& history, const char* stage, Fn&& fn) {
  const std::string prefix = std::string(stage) + " iteration " + std::to_string(iteration) + ": ";
  try {
    return fn();
  } catch (const MeshTanglingError& e) {
    throw MeshTanglingError(prefix + e.what(), e.min_area());
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(prefix + e.what(), e.history());
  } catch (const NumericalError& e) {
    throw ConvergenceError(prefix + e.what(), history);
  }
}

}  // namespace

FsiEquilibrium run_fsi(const FsiSystem& system, const CouplingConfig& config, const FsiEquilibrium* warm) {
  config.validate();
  const FsiProblem& p = system.problem();
  const auto& sif = system.structure_interface();
  const int ns = p.structure_mesh.num_nodes();

  FsiEquilibrium eq;
  VecField u_hat(ns);
  VecField u_guess(ns);
  bool have_fluid = false;
  if (warm) {
    for (int i : sif) u_hat[i] = warm->interface_displacement[i];
    u_guess = warm->structure.u;
    eq.fluid = warm->fluid;
    have_fluid = true;
  }

  std::vector<double> delta_prev;
  double omega = config.aitken_initial;
  VecField u_prev = u_hat;
  for (int k = 1; k <= config.max_iterations; ++k) {
    // A relaxed update that tangles the fluid mesh is shortened by halving omega.
    for (int cut = 0;; ++cut) {
      try {
        eq.mesh_displacement = system.mesh_motion().solve(system.maps().displacement_to_fluid(u_hat));
        break;
      } catch (const MeshTanglingError& e) {
        if (delta_prev.empty() || cut == 4)
          throw MeshTanglingError("fsi iteration " + std::to_string(k) + ": " + e.what(), e.min_area());
        omega *= 0.5;
        u_hat = u_prev;
        scatter_add(u_hat, sif, delta_prev, omega);
      }
    }
    eq.interface_displacement = u_hat;
    with_context(k, eq.residual_history, "fsi", [&] {
      eq.fluid_coords = deformed(p.fluid_mesh, eq.mesh_displacement);
      eq.fluid = solve_fluid(system.fluid(), eq.fluid_coords, have_fluid ? &eq.fluid : nullptr);
      have_fluid = true;
      eq.interface_forces = interface_forces(system.fluid(), eq.fluid_coords, eq.fluid);
      eq.structure = solve_structure(p.structure_mesh, system.maps().force_to_structure(eq.interface_forces),
                                     p.material, system.structure_dirichlet(), p.structure_opts, &u_guess);
      return 0;
    });
    u_guess = eq.structure.u;

    std::vector<double> delta = gather(eq.structure.u, sif);
    const auto hat = gather(u_hat, sif);
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] -= hat[i];
    const double res = norm2(delta);
    eq.residual_history.push_back(res);
    eq.iterations = k;
    if (res <= config.tolerance) {
      double umax = 0.0;
      for (int i : sif) umax = std::max(umax, norm(eq.structure.u[i]));
      eq.kappa = umax / p.characteristic_length;
      return eq;
    }
    if (!delta_prev.empty()) omega = aitken_update(delta_prev, delta, omega, config.omega_min, config.omega_max);
    u_prev = u_hat;
    scatter_add(u_hat, sif, delta, omega);
    delta_prev = std::move(delta);
  }
  throw ConvergenceError("fsi coupling did not converge in " + std::to_string(config.max_iterations) + " iterations",
                         eq.residual_history);
}

ObjectiveContext objective_context(const FsiSystem& system, const FsiEquilibrium& eq) {
  return {system.fluid(), eq.fluid_coords, eq.fluid, eq.structure.u, eq.interface_forces, system.maps()};
}

AdjointBundle run_adjoint_fsi(const FsiSystem& system, const FsiEquilibrium& eq,
                              const std::vector<ObjectiveSpec>& objectives, const CouplingConfig& config) {
  config.validate();
  for (const auto& o : objectives) o.validate();
  const FsiProblem& p = system.problem();
  const auto& sif = system.structure_interface();
  const auto& maps = system.maps();
  const auto partials = objective_partials(objectives, objective_context(system, eq));

  AdjointBundle b;
  b.formulation = config.formulation;
  b.uncoupled = config.uncoupled;
  VecField psi_hat(p.structure_mesh.num_nodes());
  std::vector<double> delta_prev;
  double omega = config.aitken_initial;
  const int max_it = config.uncoupled ? 1 : config.max_iterations;

  for (int k = 1; k <= max_it; ++k) {
    with_context(k, b.residual_history, "adjoint", [&] {
      FluidObjectiveTerms terms = partials.fluid;
      const auto d_s = maps.hf_transpose(psi_hat);
      for (std::size_t i = 0; i < terms.d.size(); ++i) terms.d[i] += d_s[i];
      b.psi_fluid = adjoint_fluid(system.fluid(), eq.fluid_coords, eq.fluid, terms);
      b.fluid_partials =
          fluid_shape_partials(system.fluid(), eq.fluid_coords, eq.fluid, b.psi_fluid, terms, config.formulation);
      b.psi_mesh = config.formulation == Formulation::complete ? system.mesh_motion().adjoint_complete(b.fluid_partials)
                                                               : system.mesh_motion().adjoint_reduced(b.fluid_partials);
      if (config.uncoupled) {
        b.psi_structure.assign(p.structure_mesh.num_nodes(), Vec2{});
      } else {
        VecField rhs = partials.du_structure;
        const auto load = maps.hs_transpose(b.psi_mesh);
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += load[i];
        b.psi_structure = adjoint_structure(p.structure_mesh, eq.structure.u, p.material, system.structure_dirichlet(), rhs);
      }
      return 0;
    });
    b.iterations = k;
    if (config.uncoupled) break;

    std::vector<double> delta = gather(b.psi_structure, sif);
    const auto hat = gather(psi_hat, sif);
    const double scale = norm2(delta);
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] -= hat[i];
    const double res = norm2(delta);
    b.residual_history.push_back(res);
    if (res <= config.adjoint_tolerance * scale) break;
    if (k == max_it)
      throw ConvergenceError("adjoint coupling did not converge in " + std::to_string(max_it) + " iterations",
                             b.residual_history);
    if (!delta_prev.empty()) omega = aitken_update(delta_prev, delta, omega, config.omega_min, config.omega_max);
    scatter_add(psi_hat, sif, delta, omega);
    delta_prev = std::move(delta);
  }

  b.mesh_partials = system.mesh_motion().shape_sens(eq.mesh_displacement, b.psi_mesh);
  b.structure_partials =
      shape_sens_structure(p.structure_mesh, eq.structure.u, b.psi_structure, p.material, p.structure_opts);
  return b;
}

std::vector<int> default_design_nodes(const FsiSystem& system) {
  const Mesh2D& m = system.problem().fluid_mesh;
  std::set<int> other;
  for (const auto& e : m.boundary)
    if (e.tag != system.problem().interface_tag) {
      other.insert(e.a);
      other.insert(e.b);
    }
  std::vector<int> out;
  for (int i : system.fluid_interface())
    if (!other.count(i)) out.push_back(i);
  return out;
}

VecField design_normals(const FsiSystem& system) {
  VecField n = boundary_normals(system.problem().fluid_mesh, system.problem().fluid_mesh.nodes,
                                system.problem().interface_tag);
  for (auto& v : n) v = -v;
  return n;
}

SensitivityField assemble_coupled_sensitivity(const FsiSystem& system, const AdjointBundle& bundle,
                                              const std::vector<int>& design_nodes) {
  const auto& iface = system.fluid_interface();
  for (int i : design_nodes)
    if (!std::binary_search(iface.begin(), iface.end(), i))
      throw ValidationError("design node " + std::to_string(i) + " is not on the fluid interface");
  const VecField structural = map_consistent(system.maps().hs, bundle.structure_partials);
  const VecField normals = design_normals(system);
  SensitivityField s;
  s.nodes = design_nodes;
  for (int i : design_nodes) {
    s.points.push_back(system.problem().fluid_mesh.nodes[i]);
    s.gradient.push_back(bundle.fluid_partials[i] + bundle.mesh_partials[i] + structural[i]);
    s.normals.push_back(normals[i]);
  }
  s.normal_component = project_to_normal(s.gradient, s.normals);
  return s;
}

std::vector<double> project_to_normal(const VecField& field, const VecField& normals) {
  if (field.size() != normals.size()) throw ValidationError("project_to_normal: size mismatch");
  std::vector<double> out(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) out[i] = dot(field[i], normals[i]);
  return out;
}

void write_history_csv(const std::filesystem::path& path, const std::vector<double>& primal,
                       const std::vector<double>& adjoint, const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "iter,primal_residual,adjoint_residual\n" << std::setprecision(17);
  const std::size_t n = std::max(primal.size(), adjoint.size());
  for (std::size_t k = 0; k < n; ++k) {
    out << k + 1 << ",";
    if (k < primal.size()) out << primal[k];
    out << ",";
    if (k < adjoint.size()) out << adjoint[k];
    out << "\n";
  }
}

}  // namespace afsi
