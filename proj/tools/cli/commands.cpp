#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "afsi/cases.hpp"

namespace afsi::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* name(Formulation f) { return f == Formulation::complete ? "complete" : "reduced"; }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw FileError("cannot create output directory: " + dir.string(), dir);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot write " + path.string(), path);
  out << std::setprecision(17);
  return out;
}

void write_json(const fs::path& path, json j) {
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

std::string provenance(const CaseConfig& cfg, const std::string& command) {
  return "config_hash " + cfg.hash + " command " + command;
}

Vec2 drag_direction(const CaseConfig& cfg) {
  return cfg.objectives.empty() ? Vec2{1.0, 0.0} : cfg.objectives.front().direction;
}

void require_objectives(const CaseConfig& cfg) {
  if (cfg.objectives.empty()) throw ConfigError("no objectives configured: add an [objectives] section");
}

FsiEquilibrium rigid_equilibrium(const FsiSystem& sys) {
  const auto& p = sys.problem();
  FsiEquilibrium eq;
  eq.fluid_coords = p.fluid_mesh.nodes;
  eq.mesh_displacement.assign(p.fluid_mesh.nodes.size(), {});
  eq.fluid = solve_fluid(sys.fluid(), eq.fluid_coords);
  eq.interface_forces = interface_forces(sys.fluid(), eq.fluid_coords, eq.fluid);
  eq.structure.u.assign(p.structure_mesh.nodes.size(), {});
  eq.structure.f_int.assign(p.structure_mesh.nodes.size(), {});
  eq.structure.f_ext = sys.maps().force_to_structure(eq.interface_forces);
  eq.interface_displacement.assign(p.structure_mesh.nodes.size(), {});
  return eq;
}

FsiEquilibrium equilibrium(const FsiSystem& sys, const CaseConfig& cfg) {
  return cfg.rigid ? rigid_equilibrium(sys) : run_fsi(sys, cfg.coupling);
}

CouplingConfig adjoint_config(const CaseConfig& cfg, Formulation f) {
  auto c = cfg.coupling;
  c.formulation = f;
  if (cfg.rigid) c.uncoupled = true;
  return c;
}

json objective_values(const CaseConfig& cfg, const ObjectiveContext& ctx) {
  json list = json::array();
  for (const auto& o : cfg.objectives)
    list.push_back({{"kind", to_string(o.kind)}, {"weight", o.weight}, {"value", eval_objective(o, ctx)}});
  return list;
}

/// Relative L2 difference, zero when both vectors vanish and null when only the reference does.
json safe_rel(const std::vector<double>& candidate, const std::vector<double>& reference) {
  if (norm2(reference) == 0.0) return norm2(candidate) == 0.0 ? json(0.0) : json(nullptr);
  return relative_l2_error(candidate, reference);
}

void write_gradient_csv(const fs::path& path, const SensitivityField& s, const std::string& header) {
  auto out = open_out(path);
  out << "# " << header << "\n";
  out << "node,X,Y,grad_x,grad_y,normal_x,normal_y,normal_gradient\n";
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    out << s.nodes[i] << "," << s.points[i].x << "," << s.points[i].y << "," << s.gradient[i].x << ","
        << s.gradient[i].y << "," << s.normals[i].x << "," << s.normals[i].y << "," << s.normal_component[i] << "\n";
  }
}

double max_interface_displacement(const FsiSystem& sys, const VecField& u) {
  double m = 0.0;
  for (int n : sys.structure_interface()) m = std::max(m, norm(u[n]));
  return m;
}

std::vector<VtkField> tag_fields(const Mesh2D& mesh) {
  std::vector<std::string> tags;
  for (const auto& e : mesh.boundary)
    if (std::find(tags.begin(), tags.end(), e.tag) == tags.end()) tags.push_back(e.tag);
  std::vector<VtkField> fields;
  for (const auto& t : tags) {
    std::vector<double> v(mesh.nodes.size(), 0.0);
    for (int n : mesh.nodes_with_tag(t)) v[n] = 1.0;
    fields.push_back(scalar_field("tag_" + t, v));
  }
  return fields;
}

}  // namespace

std::vector<Formulation> parse_formulations(const std::string& name) {
  if (name == "complete") return {Formulation::complete};
  if (name == "reduced") return {Formulation::reduced};
  if (name == "both") return {Formulation::complete, Formulation::reduced};
  throw ConfigError("formulation must be complete, reduced or both, got '" + name + "'");
}

int cmd_solve_fsi(const CaseConfig& cfg, const fs::path& out, std::ostream& log) {
  ensure_dir(out);
  const FsiSystem sys(load_problem(cfg));
  const auto& p = sys.problem();
  const auto eq = equilibrium(sys, cfg);
  const auto ctx = objective_context(sys, eq);
  const Vec2 dir = drag_direction(cfg);

  const auto undeformed = solve_fluid(sys.fluid(), p.fluid_mesh.nodes);
  const double drag0 = eval_interface_drag(interface_forces(sys.fluid(), p.fluid_mesh.nodes, undeformed), dir);
  const double drag = eval_interface_drag(eq.interface_forces, dir);

  json m;
  m["config_hash"] = cfg.hash;
  m["drag"] = drag;
  m["drag_undeformed"] = drag0;
  m["drag_reduction"] = drag0 != 0.0 ? 1.0 - drag / drag0 : 0.0;
  m["power_loss"] = eval_power_loss(sys.fluid(), eq.fluid_coords, eq.fluid);
  m["power_loss_undeformed"] = eval_power_loss(sys.fluid(), p.fluid_mesh.nodes, undeformed);
  m["interface_energy_fluid"] = eval_interface_energy(eq.structure.u, eq.interface_forces, sys.maps(), EnergySide::fluid);
  m["interface_energy_structure"] =
      eval_interface_energy(eq.structure.u, eq.interface_forces, sys.maps(), EnergySide::structure);
  m["kappa"] = eq.kappa;
  m["tip_deflection"] = max_interface_displacement(sys, eq.structure.u);
  m["iterations"] = eq.iterations;
  m["rigid"] = cfg.rigid;
  m["fluid_nodes"] = p.fluid_mesh.num_nodes();
  m["structure_nodes"] = p.structure_mesh.num_nodes();
  m["interface_edges"] = static_cast<int>(p.fluid_mesh.edges_with_tag(p.interface_tag).size());
  m["objectives"] = objective_values(cfg, ctx);
  m["residual_history"] = eq.residual_history;
  write_json(out / "metrics.json", m);

  const auto header = provenance(cfg, "solve-fsi");
  write_history_csv(out / "fsi_history.csv", eq.residual_history, {}, header);
  export_vtk(out / "fluid.vtk", p.fluid_mesh, eq.fluid_coords,
             {vector_field("velocity", eq.fluid.velocities()), scalar_field("pressure", eq.fluid.pressures()),
              vector_field("mesh_displacement", eq.mesh_displacement),
              vector_field("interface_force", eq.interface_forces)},
             header);
  export_vtk(out / "structure.vtk", p.structure_mesh, deformed(p.structure_mesh, eq.structure.u),
             {vector_field("displacement", eq.structure.u), vector_field("load", eq.structure.f_ext)}, header);

  log << "solve-fsi: " << eq.iterations << " coupling iterations, drag " << drag << " (undeformed " << drag0
      << "), kappa " << eq.kappa << "\n";
  return 0;
}

int cmd_adjoint(const CaseConfig& cfg, const fs::path& out, const std::string& formulation, std::ostream& log) {
  require_objectives(cfg);
  const auto forms = parse_formulations(formulation);
  ensure_dir(out);
  const FsiSystem sys(load_problem(cfg));
  const auto eq = equilibrium(sys, cfg);
  const auto ctx = objective_context(sys, eq);
  const auto design = default_design_nodes(sys);
  const auto header = provenance(cfg, "adjoint");

  json summary;
  summary["config_hash"] = cfg.hash;
  summary["objectives"] = objective_values(cfg, ctx);
  summary["objective_value"] = eval_objectives(cfg.objectives, ctx);
  summary["uncoupled"] = cfg.rigid || cfg.coupling.uncoupled;
  summary["primal_iterations"] = eq.iterations;
  std::vector<std::vector<double>> grads;
  for (auto f : forms) {
    const auto bundle = run_adjoint_fsi(sys, eq, cfg.objectives, adjoint_config(cfg, f));
    const auto s = assemble_coupled_sensitivity(sys, bundle, design);
    write_gradient_csv(out / (std::string("gradient_") + name(f) + ".csv"), s,
                       header + " formulation " + name(f));
    write_history_csv(out / (std::string("adjoint_history_") + name(f) + ".csv"), eq.residual_history,
                      bundle.residual_history, header + " formulation " + name(f));
    summary["formulations"][name(f)] = {{"iterations", bundle.iterations},
                                        {"gradient_norm", norm2(s.normal_component)},
                                        {"residual_history", bundle.residual_history}};
    grads.push_back(s.normal_component);
    log << "adjoint (" << name(f) << "): " << bundle.iterations << " iterations, |dJ/dn| "
        << norm2(s.normal_component) << "\n";
  }
  if (grads.size() == 2) summary["rel_l2_reduced_vs_complete"] = safe_rel(grads[1], grads[0]);
  write_json(out / "adjoint_summary.json", summary);
  return 0;
}

int cmd_verify_fd(const CaseConfig& cfg, const fs::path& out, const std::string& formulation, std::ostream& log) {
  require_objectives(cfg);
  const auto forms = parse_formulations(formulation);
  ensure_dir(out);
  const auto problem = load_problem(cfg);
  const FsiSystem sys(problem);
  const auto eq = equilibrium(sys, cfg);

  FdConfig fd = cfg.fd.fd;
  if (fd.sample_nodes.empty()) fd.sample_nodes = spread_design_nodes(sys, cfg.fd.samples);
  const auto design = default_design_nodes(sys);
  for (int n : fd.sample_nodes)
    if (!std::binary_search(design.begin(), design.end(), n))
      throw ConfigError("fd.nodes: node " + std::to_string(n) + " is not a design node");

  std::vector<FdSample> cd;
  if (cfg.rigid) {
    cd = central_difference(problem, fd, [&](const FsiProblem& p) {
      const FsiSystem s(p);
      const auto e = rigid_equilibrium(s);
      return std::vector<double>{eval_objectives(cfg.objectives, objective_context(s, e))};
    });
  } else {
    cd = central_difference_gradient(problem, {cfg.objectives}, cfg.coupling, fd, &eq);
  }

  struct Column {
    std::string label;
    std::vector<double> values;  // per sample, in fd.sample_nodes order
  };
  std::vector<Column> cols;
  auto add_column = [&](const std::string& label, const CouplingConfig& c) {
    const auto bundle = run_adjoint_fsi(sys, eq, cfg.objectives, c);
    const auto s = assemble_coupled_sensitivity(sys, bundle, fd.sample_nodes);
    cols.push_back({label, s.normal_component});
  };
  for (auto f : forms) add_column(name(f), adjoint_config(cfg, f));
  if (!cfg.rigid && !cfg.coupling.uncoupled) {
    auto c = adjoint_config(cfg, Formulation::complete);
    c.uncoupled = true;
    add_column("uncoupled", c);
  }

  std::vector<std::size_t> good;
  json flagged = json::array();
  for (std::size_t i = 0; i < cd.size(); ++i) {
    if (cd[i].ok) good.push_back(i);
    else flagged.push_back({{"node", cd[i].node}, {"message", cd[i].message}});
  }
  if (good.empty()) throw SolverError("verify-fd: every central-difference sample failed");

  const auto header = provenance(cfg, "verify-fd");
  {
    auto csv = open_out(out / "verify_fd.csv");
    csv << "# " << header << "\n";
    csv << "node,X,Y,ok,fd";
    for (const auto& c : cols) csv << "," << c.label;
    csv << "\n";
    for (std::size_t i = 0; i < cd.size(); ++i) {
      csv << cd[i].node << "," << cd[i].point.x << "," << cd[i].point.y << "," << (cd[i].ok ? 1 : 0) << ",";
      if (cd[i].ok) csv << cd[i].values[0];
      for (const auto& c : cols) csv << "," << c.values[i];
      csv << "\n";
    }
  }

  std::vector<double> ref;
  for (auto i : good) ref.push_back(cd[i].values[0]);
  json report;
  report["config_hash"] = cfg.hash;
  report["step"] = fd.step;
  report["tolerance"] = cfg.fd.tolerance;
  report["samples"] = cd.size();
  report["flagged"] = flagged;
  bool pass = true;
  for (const auto& c : cols) {
    std::vector<double> cand;
    for (auto i : good) cand.push_back(c.values[i]);
    const auto e = safe_rel(cand, ref);
    report["rel_l2_error"][c.label] = e;
    const bool requested = c.label != "uncoupled";
    if (requested && !(e.is_number() && e.get<double>() <= cfg.fd.tolerance)) pass = false;
    log << "verify-fd: " << c.label << " relative L2 error " << e.dump() << "\n";
  }
  report["pass"] = pass;
  write_json(out / "verify_fd.json", report);
  log << "verify-fd: " << (pass ? "PASS" : "FAIL") << " at tolerance " << cfg.fd.tolerance << "\n";
  return 0;
}

int cmd_refine_study(const CaseConfig& cfg, const fs::path& out, std::ostream& log) {
  require_objectives(cfg);
  ensure_dir(out);
  std::vector<FsiProblem> levels;
  if (cfg.refine.fluid_meshes.empty()) {
    levels.push_back(load_problem(cfg));
  } else {
    for (std::size_t i = 0; i < cfg.refine.fluid_meshes.size(); ++i)
      levels.push_back(load_problem(cfg, cfg.refine.fluid_meshes[i], cfg.refine.structure_meshes[i]));
  }
  const auto rows = refinement_study(levels, cfg.refine.stiffness_scales, cfg.objectives, cfg.coupling);
  write_refinement_csv(out / "refine.csv", rows, provenance(cfg, "refine-study"));

  json j;
  j["config_hash"] = cfg.hash;
  j["rows"] = json::array();
  for (const auto& r : rows) {
    j["rows"].push_back({{"level", r.level},
                         {"stiffness_scale", r.stiffness_scale},
                         {"interface_edges", r.interface_edges},
                         {"fluid_nodes", r.fluid_nodes},
                         {"kappa", r.kappa},
                         {"objective", r.objective},
                         {"value", r.value},
                         {"formulation_error", r.formulation_error},
                         {"ok", r.ok},
                         {"message", r.message}});
    log << "refine-study: level " << r.level << " scale " << r.stiffness_scale << " " << r.objective
        << " complete-vs-reduced " << r.formulation_error << (r.ok ? "" : " (failed: " + r.message + ")") << "\n";
  }
  write_json(out / "refine.json", j);
  return 0;
}

int cmd_map_test(const CaseConfig& cfg, const fs::path& out, std::ostream& log) {
  ensure_dir(out);
  const auto p = load_problem(cfg);
  const auto maps = build_interface_maps(p.fluid_mesh, p.structure_mesh, p.mapping, p.force_mode, p.interface_tag);
  const auto header = provenance(cfg, "map-test");

  auto dump = [&](const MappingOperator& op, const fs::path& path) {
    auto csv = open_out(path);
    csv << "# " << header << " source " << op.source_tag << " target " << op.target_tag << "\n";
    csv << "target_node,source_node,weight\n";
    for (const auto& t : op.H.triplets())
      csv << op.target_nodes[t.row] << "," << op.source_nodes[t.col] << "," << t.value << "\n";
  };
  dump(maps.hs, out / "map_hs.csv");
  if (p.force_mode == ForceMode::consistent) dump(maps.hf_consistent, out / "map_hf.csv");

  // Constant reproduction and the work identity with smooth deterministic fields.
  VecField ones(p.structure_mesh.nodes.size()), u(p.structure_mesh.nodes.size());
  for (int n : maps.hs.source_nodes) {
    ones[n] = {1.0, 1.0};
    const Vec2 x = p.structure_mesh.nodes[n];
    u[n] = {std::sin(3 * x.x + x.y), std::cos(2 * x.y - x.x)};
  }
  VecField f(p.fluid_mesh.nodes.size());
  for (int n : maps.hs.target_nodes) {
    const Vec2 x = p.fluid_mesh.nodes[n];
    f[n] = {std::cos(x.x - 2 * x.y), std::sin(x.x + x.y)};
  }
  double const_err = 0.0;
  const auto mapped = maps.displacement_to_fluid(ones);
  for (int n : maps.hs.target_nodes) const_err = std::max(const_err, norm(mapped[n] - Vec2{1.0, 1.0}));
  const double lhs = dot(maps.displacement_to_fluid(u), f);
  const double rhs = dot(u, maps.hs_transpose(f));
  const double ef = eval_interface_energy(u, f, maps, EnergySide::fluid);
  const double es = eval_interface_energy(u, f, maps, EnergySide::structure);

  json j;
  j["config_hash"] = cfg.hash;
  j["method"] = p.mapping == MappingMethod::mortar ? "mortar" : "nearest_element";
  j["force_mode"] = p.force_mode == ForceMode::consistent ? "consistent" : "conservative";
  j["matching"] = maps.hs.matching;
  j["rows"] = maps.hs.H.rows();
  j["cols"] = maps.hs.H.cols();
  j["nonzeros"] = maps.hs.H.nonzeros();
  j["constant_error"] = const_err;
  j["transpose_identity_error"] = std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300);
  j["energy_fluid"] = ef;
  j["energy_structure"] = es;
  j["energy_relative_difference"] = std::abs(ef - es) / std::max(std::abs(ef), 1e-300);
  write_json(out / "map_test.json", j);
  log << "map-test: " << j["method"].get<std::string>() << (maps.hs.matching ? " (matching)" : "") << ", "
      << maps.hs.H.nonzeros() << " weights, constant error " << const_err << "\n";
  return 0;
}

int cmd_export_vtk(const CaseConfig& cfg, const fs::path& out, std::ostream& log) {
  ensure_dir(out);
  const auto p = load_problem(cfg);
  const auto header = provenance(cfg, "export-vtk");
  export_vtk(out / "fluid_mesh.vtk", p.fluid_mesh, p.fluid_mesh.nodes, tag_fields(p.fluid_mesh), header);
  export_vtk(out / "structure_mesh.vtk", p.structure_mesh, p.structure_mesh.nodes, tag_fields(p.structure_mesh),
             header);
  log << "export-vtk: wrote " << (out / "fluid_mesh.vtk").string() << " and "
      << (out / "structure_mesh.vtk").string() << "\n";
  return 0;
}

fs::path seed_beam_case(const fs::path& dir) {
  ensure_dir(dir);
  const BeamGeometry geo;
  const BeamPhysics phys;
  CaseConfig cfg;
  cfg.problem = make_beam_problem(geo, phys);
  cfg.problem.fluid_mesh = {};
  cfg.problem.structure_mesh = {};
  cfg.objectives = {{ObjectiveKind::interface_drag}};

  const std::vector<std::pair<double, std::string>> levels = {{1.0, ""}, {1.5, "_r1.5"}, {2.0, "_r2"}};
  for (const auto& [factor, suffix] : levels) {
    const auto c = make_beam_case(geo.refined(factor));
    const auto fluid = dir / ("beam_fluid" + suffix + ".mesh");
    const auto solid = dir / ("beam_structure" + suffix + ".mesh");
    write_mesh(c.fluid, fluid);
    write_mesh(c.structure, solid);
    cfg.refine.fluid_meshes.push_back(fluid);
    cfg.refine.structure_meshes.push_back(solid);
  }
  cfg.fluid_mesh = cfg.refine.fluid_meshes.front();
  cfg.structure_mesh = cfg.refine.structure_meshes.front();
  cfg.output = dir / "out";
  cfg.coupling.tolerance = 1e-10;
  cfg.coupling.adjoint_tolerance = 1e-10;
  cfg.problem.fluid_opts.newton_rtol = 1e-12;

  const auto ini = dir / "beam.ini";
  cfg.source = ini;
  auto out = open_out(ini);
  out << "# Beam in a channel: flexible beam clamped to the channel floor, Re = 10.\n";
  write_case_config(cfg, out);
  return ini;
}

namespace {

std::string error_type(const Error& e) {
  if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
  if (dynamic_cast<const ValidationError*>(&e)) return "ValidationError";
  if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
  if (dynamic_cast<const InputError*>(&e)) return "InputError";
  if (dynamic_cast<const ConvergenceError*>(&e)) return "ConvergenceError";
  if (dynamic_cast<const MeshTanglingError*>(&e)) return "MeshTanglingError";
  if (dynamic_cast<const NonphysicalStateError*>(&e)) return "NonphysicalStateError";
  if (dynamic_cast<const SolverError*>(&e)) return "SolverError";
  if (dynamic_cast<const AssemblyError*>(&e)) return "AssemblyError";
  if (dynamic_cast<const NumericalError*>(&e)) return "NumericalError";
  return "Error";
}

json error_json(const std::string& type, const std::string& message, int code, const fs::path* path = nullptr) {
  json j = {{"error", {{"type", type}, {"message", message}}}, {"exit_code", code}};
  if (path) j["error"]["path"] = path->string();
  return j;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Partitioned FSI solver with adjoint shape sensitivities", "afsi"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  std::string config_path, out_dir, formulation, seed;
  app.add_option("--config", config_path, "Case configuration (INI)");
  app.add_option("--out", out_dir, "Output directory (overrides case.output)");
  app.add_option("--formulation", formulation, "complete, reduced or both")
      ->check(CLI::IsMember({"complete", "reduced", "both"}));
  app.add_option("--seed-case", seed, "Generate a shipped case (beam)")->check(CLI::IsMember({"beam"}));

  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {{"solve-fsi", "Coupled steady FSI equilibrium, metrics and fields"},
                      {"adjoint", "Coupled adjoint shape gradient"},
                      {"verify-fd", "Compare adjoint gradients with central differences"},
                      {"refine-study", "Complete-vs-reduced gradient difference over mesh levels"},
                      {"map-test", "Dump and check the interface mapping operator"},
                      {"export-vtk", "Write the undeformed meshes with boundary tags as VTK"}};
  for (const auto& s : subs) app.add_subcommand(s.name, s.help);

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      out << app.help();
      return 0;
    } catch (const CLI::ParseError& e) {
      throw ConfigError(e.what());
    }

    if (!seed.empty()) {
      const auto ini = seed_beam_case(out_dir.empty() ? fs::path("beam_case") : fs::path(out_dir));
      out << "seeded beam case: " << ini.string() << "\n";
      if (app.get_subcommands().empty()) return 0;
      if (config_path.empty()) config_path = ini.string();
    }
    if (app.get_subcommands().empty()) throw ConfigError("no subcommand given (see --help)");
    if (config_path.empty()) throw ConfigError("--config is required");

    const auto cfg = load_case_config(config_path);
    const fs::path dir = out_dir.empty() || !seed.empty() ? cfg.output : fs::path(out_dir);
    const std::string form = formulation.empty() ? cfg.formulation : formulation;
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "solve-fsi") return cmd_solve_fsi(cfg, dir, out);
    if (cmd == "adjoint") return cmd_adjoint(cfg, dir, form, out);
    if (cmd == "verify-fd") return cmd_verify_fd(cfg, dir, form, out);
    if (cmd == "refine-study") return cmd_refine_study(cfg, dir, out);
    if (cmd == "map-test") return cmd_map_test(cfg, dir, out);
    return cmd_export_vtk(cfg, dir, out);
  } catch (const FileError& e) {
    err << error_json("InputError", e.what(), 2, &e.path()).dump() << "\n";
    return 2;
  } catch (const InputError& e) {
    err << error_json(error_type(e), e.what(), 2).dump() << "\n";
    return 2;
  } catch (const Error& e) {
    err << error_json(error_type(e), e.what(), 1).dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << error_json("InternalError", e.what(), 1).dump() << "\n";
    return 1;
  }
}

}  // namespace afsi::cli
