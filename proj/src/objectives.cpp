#include "afsi/objectives.hpp"

#include <cmath>

#include "afsi/errors.hpp"

namespace afsi {

ObjectiveKind parse_objective_kind(const std::string& name) {
  if (name == "interface_drag" || name == "drag") return ObjectiveKind::interface_drag;
  if (name == "power_loss") return ObjectiveKind::power_loss;
  if (name == "interface_energy_fluid") return ObjectiveKind::interface_energy_fluid;
  if (name == "interface_energy_structure") return ObjectiveKind::interface_energy_structure;
  throw ConfigError("unknown objective kind '" + name + "'");
}

std::string to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::interface_drag: return "interface_drag";
    case ObjectiveKind::power_loss: return "power_loss";
    case ObjectiveKind::interface_energy_fluid: return "interface_energy_fluid";
    case ObjectiveKind::interface_energy_structure: return "interface_energy_structure";
  }
  throw ConfigError("unknown objective kind");
}

void ObjectiveSpec::validate() const {
  if (!std::isfinite(weight)) throw ConfigError("objective weight must be finite");
  if (kind == ObjectiveKind::interface_drag && std::abs(norm(direction) - 1.0) > 1e-12)
    throw ConfigError("drag direction must be a unit vector");
}

double eval_interface_drag(const VecField& f_fluid, const Vec2& direction) {
  double sum = 0.0;
  for (const auto& f : f_fluid) sum += dot(direction, f);
  return sum;
}

namespace {

std::vector<int> far_field_edges(const FluidSetup& setup) {
  const Mesh2D& mesh = *setup.mesh;
  std::vector<int> edges;
  for (int e = 0; e < static_cast<int>(mesh.boundary.size()); ++e) {
    const auto& tag = mesh.boundary[e].tag;
    bool far = tag == setup.bc.inlet_tag || tag == setup.bc.outlet_tag;
    for (const auto& w : setup.bc.wall_tags) far = far || tag == w;
    if (far) edges.push_back(e);
  }
  return edges;
}

double total_pressure(const FluidSetup& setup, const FluidState& st, int i) {
  const Vec2 v = st.velocity(i);
  return st.pressure(i) + 0.5 * setup.params.density * dot(v, v);
}

}  // namespace

double eval_power_loss(const FluidSetup& setup, const VecField& coords, const FluidState& state) {
  const Mesh2D& mesh = *setup.mesh;
  double p = 0.0;
  for (int e : far_field_edges(setup)) {
    const auto& be = mesh.boundary[e];
    const Vec2 an = 0.5 * right_normal(coords[be.b] - coords[be.a]);
    for (int i : {be.a, be.b}) p -= total_pressure(setup, state, i) * dot(an, state.velocity(i));
  }
  return p;
}

PowerLossPartials power_loss_partials(const FluidSetup& setup, const VecField& coords, const FluidState& state) {
  const Mesh2D& mesh = *setup.mesh;
  const double rho = setup.params.density;
  PowerLossPartials out;
  out.dw.assign(3 * mesh.nodes.size(), 0.0);
  out.dx.assign(mesh.nodes.size(), Vec2{});
  for (int e : far_field_edges(setup)) {
    const auto& be = mesh.boundary[e];
    const Vec2 an = 0.5 * right_normal(coords[be.b] - coords[be.a]);
    Vec2 q;
    for (int i : {be.a, be.b}) {
      const Vec2 v = state.velocity(i);
      const double e_i = total_pressure(setup, state, i);
      const double a_i = dot(an, v);
      out.dw[3 * i] -= rho * v.x * a_i + e_i * an.x;
      out.dw[3 * i + 1] -= rho * v.y * a_i + e_i * an.y;
      out.dw[3 * i + 2] -= a_i;
      q += e_i * v;
    }
    const Vec2 g{-q.y, q.x};
    out.dx[be.b] -= 0.5 * g;
    out.dx[be.a] += 0.5 * g;
  }
  return out;
}

double eval_interface_energy(const VecField& u_structure, const VecField& f_fluid, const InterfaceMaps& maps,
                             EnergySide side) {
  if (side == EnergySide::fluid) return dot(maps.displacement_to_fluid(u_structure), f_fluid);
  return dot(u_structure, maps.force_to_structure(f_fluid));
}

double eval_objective(const ObjectiveSpec& spec, const ObjectiveContext& ctx) {
  switch (spec.kind) {
    case ObjectiveKind::interface_drag: return eval_interface_drag(ctx.f_fluid, spec.direction);
    case ObjectiveKind::power_loss: return eval_power_loss(ctx.setup, ctx.fluid_coords, ctx.fluid);
    case ObjectiveKind::interface_energy_fluid:
      return eval_interface_energy(ctx.u_structure, ctx.f_fluid, ctx.maps, EnergySide::fluid);
    case ObjectiveKind::interface_energy_structure:
      return eval_interface_energy(ctx.u_structure, ctx.f_fluid, ctx.maps, EnergySide::structure);
  }
  throw ConfigError("unknown objective kind");
}

double eval_objectives(const std::vector<ObjectiveSpec>& specs, const ObjectiveContext& ctx) {
  double sum = 0.0;
  for (const auto& s : specs) sum += s.weight * eval_objective(s, ctx);
  return sum;
}

namespace {

ObjectivePartials empty_partials(const ObjectiveContext& ctx) {
  const std::size_t nf = ctx.setup.mesh->nodes.size();
  ObjectivePartials p;
  p.fluid.dJ_dw.assign(3 * nf, 0.0);
  p.fluid.dJ_dx.assign(nf, Vec2{});
  p.fluid.d.assign(nf, Vec2{});
  p.du_structure.assign(ctx.u_structure.size(), Vec2{});
  return p;
}

void axpy(double a, const VecField& x, VecField& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

}  // namespace

ObjectivePartials objective_partials(const ObjectiveSpec& spec, const ObjectiveContext& ctx) {
  ObjectivePartials p = empty_partials(ctx);
  const double a = spec.weight;
  switch (spec.kind) {
    case ObjectiveKind::interface_drag: {
      const auto& dofs_nodes = ctx.setup.mesh->nodes_with_tag(ctx.setup.bc.interface_tag);
      for (int i : dofs_nodes) p.fluid.d[i] = a * spec.direction;
      break;
    }
    case ObjectiveKind::power_loss: {
      auto pl = power_loss_partials(ctx.setup, ctx.fluid_coords, ctx.fluid);
      for (std::size_t k = 0; k < pl.dw.size(); ++k) p.fluid.dJ_dw[k] = a * pl.dw[k];
      axpy(a, pl.dx, p.fluid.dJ_dx);
      break;
    }
    case ObjectiveKind::interface_energy_fluid:
      axpy(a, ctx.maps.displacement_to_fluid(ctx.u_structure), p.fluid.d);
      axpy(a, ctx.maps.hs_transpose(ctx.f_fluid), p.du_structure);
      break;
    case ObjectiveKind::interface_energy_structure:
      axpy(a, ctx.maps.hf_transpose(ctx.u_structure), p.fluid.d);
      axpy(a, ctx.maps.force_to_structure(ctx.f_fluid), p.du_structure);
      break;
  }
  return p;
}

ObjectivePartials objective_partials(const std::vector<ObjectiveSpec>& specs, const ObjectiveContext& ctx) {
  ObjectivePartials total = empty_partials(ctx);
  for (const auto& s : specs) {
    auto p = objective_partials(s, ctx);
    for (std::size_t k = 0; k < total.fluid.dJ_dw.size(); ++k) total.fluid.dJ_dw[k] += p.fluid.dJ_dw[k];
    axpy(1.0, p.fluid.dJ_dx, total.fluid.dJ_dx);
    axpy(1.0, p.fluid.d, total.fluid.d);
    axpy(1.0, p.du_structure, total.du_structure);
  }
  return total;
}

}  // namespace afsi
