#include "afsi/verify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>

#include "afsi/errors.hpp"

namespace afsi {

void FdConfig::validate() const {
  if (!(step > 0)) throw ConfigError("finite-difference step must be positive");
}

std::vector<int> spread_design_nodes(const FsiSystem& system, int count) {
  if (count < 0) throw ConfigError("sample count must be non-negative");
  const auto design = default_design_nodes(system);
  const auto& mesh = system.problem().fluid_mesh;
  std::map<int, int> next;
  std::set<int> has_prev;
  for (int e : mesh.edges_with_tag(system.problem().interface_tag)) {
    next[mesh.boundary[e].a] = mesh.boundary[e].b;
    has_prev.insert(mesh.boundary[e].b);
  }
  std::vector<int> starts;
  for (const auto& [a, b] : next)
    if (!has_prev.count(a)) starts.push_back(a);
  for (const auto& [a, b] : next) starts.push_back(a);

  const std::set<int> in_design(design.begin(), design.end());
  std::set<int> seen;
  std::vector<int> ordered;
  for (int s : starts) {
    for (int n = s; !seen.count(n);) {
      seen.insert(n);
      if (in_design.count(n)) ordered.push_back(n);
      auto it = next.find(n);
      if (it == next.end()) break;
      n = it->second;
    }
  }
  const auto total = ordered.size();
  if (count == 0 || static_cast<std::size_t>(count) >= total) return ordered;
  std::vector<int> out;
  for (std::size_t i = 0; i < static_cast<std::size_t>(count); ++i) out.push_back(ordered[(2 * i + 1) * total / (2 * count)]);
  return out;
}

FsiProblem perturbed_problem(const FsiProblem& base, const MappingOperator& hs, int fluid_node, const Vec2& delta) {
  FsiProblem p = base;
  p.fluid_mesh.nodes[fluid_node] += delta;
  const auto it = std::find(hs.target_nodes.begin(), hs.target_nodes.end(), fluid_node);
  if (it == hs.target_nodes.end()) throw ValidationError("sample node is not on the fluid interface");
  const int row = static_cast<int>(it - hs.target_nodes.begin());
  for (int k = hs.H.row_offsets()[row]; k < hs.H.row_offsets()[row + 1]; ++k)
    p.structure_mesh.nodes[hs.source_nodes[hs.H.col_indices()[k]]] += hs.H.values()[k] * delta;
  return p;
}

std::vector<FdSample> central_difference(const FsiProblem& base, const FdConfig& fd, const ShapeFunctional& functional) {
  fd.validate();
  const FsiSystem system(base);
  const MappingOperator& hs = system.maps().hs;
  const VecField normals = design_normals(system);
  const auto nodes = fd.sample_nodes.empty() ? default_design_nodes(system) : fd.sample_nodes;
  const auto& iface = system.fluid_interface();

  std::vector<FdSample> out;
  for (int node : nodes) {
    if (!std::binary_search(iface.begin(), iface.end(), node))
      throw ValidationError("sample node " + std::to_string(node) + " is not on the fluid interface");
    FdSample s;
    s.node = node;
    s.point = base.fluid_mesh.nodes[node];
    s.direction = fd.direction == FdDirection::normal ? normals[node]
                  : fd.direction == FdDirection::x    ? Vec2{1.0, 0.0}
                                                      : Vec2{0.0, 1.0};
    try {
      const auto plus = functional(perturbed_problem(base, hs, node, fd.step * s.direction));
      const auto minus = functional(perturbed_problem(base, hs, node, -fd.step * s.direction));
      if (plus.size() != minus.size()) throw ValidationError("functional output size changed between evaluations");
      for (std::size_t k = 0; k < plus.size(); ++k) s.values.push_back((plus[k] - minus[k]) / (2.0 * fd.step));
    } catch (const NumericalError& e) {
      s.ok = false;
      s.message = e.what();
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<FdSample> central_difference_gradient(const FsiProblem& base,
                                                  const std::vector<std::vector<ObjectiveSpec>>& objective_sets,
                                                  const CouplingConfig& coupling, const FdConfig& fd,
                                                  const FsiEquilibrium* baseline) {
  return central_difference(base, fd, [&](const FsiProblem& p) {
    const FsiSystem system(p);
    const auto eq = run_fsi(system, coupling, baseline);
    const auto ctx = objective_context(system, eq);
    std::vector<double> values;
    for (const auto& set : objective_sets) values.push_back(eval_objectives(set, ctx));
    return values;
  });
}

double relative_l2_error(const std::vector<double>& candidate, const std::vector<double>& reference) {
  if (candidate.size() != reference.size()) throw ValidationError("relative_l2_error: size mismatch");
  const double ref = norm2(reference);
  if (!(ref > 0)) throw ValidationError("relative_l2_error: reference has zero norm");
  double diff = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) diff += std::pow(candidate[i] - reference[i], 2);
  return std::sqrt(diff) / ref;
}

std::vector<RefinementRow> refinement_study(const std::vector<FsiProblem>& levels,
                                            const std::vector<double>& stiffness_scales,
                                            const std::vector<ObjectiveSpec>& objectives,
                                            const CouplingConfig& coupling, FormulationPair pair) {
  std::vector<RefinementRow> rows;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    for (double scale : stiffness_scales) {
      FsiProblem p = levels[l];
      p.material.youngs_modulus *= scale;
      RefinementRow base;
      base.level = static_cast<int>(l);
      base.stiffness_scale = scale;
      base.interface_edges = static_cast<int>(p.fluid_mesh.edges_with_tag(p.interface_tag).size());
      base.fluid_nodes = p.fluid_mesh.num_nodes();
      try {
        const FsiSystem system(p);
        const auto eq = run_fsi(system, coupling);
        base.kappa = eq.kappa;
        const auto ctx = objective_context(system, eq);
        const auto design = default_design_nodes(system);
        for (const auto& obj : objectives) {
          RefinementRow row = base;
          row.objective = to_string(obj.kind);
          row.value = eval_objective(obj, ctx);
          std::vector<std::vector<double>> grads;
          for (Formulation f : {pair.reference, pair.candidate}) {
            CouplingConfig c = coupling;
            c.formulation = f;
            const auto bundle = run_adjoint_fsi(system, eq, {obj}, c);
            grads.push_back(assemble_coupled_sensitivity(system, bundle, design).normal_component);
          }
          row.formulation_error = relative_l2_error(grads[1], grads[0]);
          rows.push_back(row);
        }
      } catch (const NumericalError& e) {
        base.ok = false;
        base.message = e.what();
        rows.push_back(base);
      }
    }
  }
  return rows;
}

void write_refinement_csv(const std::filesystem::path& path, const std::vector<RefinementRow>& rows,
                          const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "level,stiffness_scale,interface_edges,fluid_nodes,kappa,objective,value,formulation_error,ok,message\n"
      << std::setprecision(12);
  for (const auto& r : rows)
    out << r.level << "," << r.stiffness_scale << "," << r.interface_edges << "," << r.fluid_nodes << "," << r.kappa
        << "," << r.objective << "," << r.value << "," << r.formulation_error << "," << (r.ok ? 1 : 0) << ",\""
        << r.message << "\"\n";
}

}  // namespace afsi
