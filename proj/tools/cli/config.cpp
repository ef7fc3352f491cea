#include "config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace afsi::cli {

namespace fs = std::filesystem;

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 0xf];
  return s;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s + ",") {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto t = trim(v);
  auto r = std::from_chars(t.data(), t.data() + t.size(), x);
  if (t.empty() || r.ec != std::errc{} || r.ptr != t.data() + t.size() || !std::isfinite(x))
    throw ConfigError(key + ": expected a finite number, got '" + v + "'");
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  int x = 0;
  const auto t = trim(v);
  auto r = std::from_chars(t.data(), t.data() + t.size(), x);
  if (t.empty() || r.ec != std::errc{} || r.ptr != t.data() + t.size())
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  const auto t = trim(v);
  if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
  if (t == "false" || t == "no" || t == "0" || t == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

Vec2 to_vec2(const std::string& key, const std::string& v) {
  const auto parts = split_list(v);
  if (parts.size() != 2) throw ConfigError(key + ": expected two numbers, got '" + v + "'");
  return {to_double(key, parts[0]), to_double(key, parts[1])};
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& p : split_list(v)) out.push_back(to_double(key, p));
  return out;
}

fs::path to_path(const fs::path& base, const std::string& v) {
  fs::path p(trim(v));
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

std::string rel(const fs::path& p, const fs::path& base) {
  if (base.empty()) return p.generic_string();
  auto r = fs::absolute(p).lexically_normal().lexically_relative(base);
  return (r.empty() ? p : r).generic_string();
}

std::string join(const std::vector<std::string>& v, const char* sep = ", ") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
  return s;
}

std::string join_doubles(const std::vector<double>& v) {
  std::vector<std::string> s;
  for (double x : v) s.push_back(fmt(x));
  return join(s);
}

MappingMethod to_method(const std::string& key, const std::string& v) {
  const auto t = trim(v);
  if (t == "nearest_element") return MappingMethod::nearest_element;
  if (t == "mortar") return MappingMethod::mortar;
  throw ConfigError(key + ": expected nearest_element or mortar, got '" + v + "'");
}

ForceMode to_force_mode(const std::string& key, const std::string& v) {
  const auto t = trim(v);
  if (t == "conservative") return ForceMode::conservative;
  if (t == "consistent") return ForceMode::consistent;
  throw ConfigError(key + ": expected conservative or consistent, got '" + v + "'");
}

FdDirection to_direction(const std::string& key, const std::string& v) {
  const auto t = trim(v);
  if (t == "normal") return FdDirection::normal;
  if (t == "x") return FdDirection::x;
  if (t == "y") return FdDirection::y;
  throw ConfigError(key + ": expected normal, x or y, got '" + v + "'");
}

const char* name(FdDirection d) { return d == FdDirection::normal ? "normal" : d == FdDirection::x ? "x" : "y"; }

using Setter =
    std::function<void(CaseConfig&, const std::string& key, const std::string& value, const fs::path& base)>;

std::map<std::string, Setter> make_setters() {
  std::map<std::string, Setter> t;
  t["case.fluid_mesh"] = [](CaseConfig& c, auto&, auto& v, auto& base) { c.fluid_mesh = to_path(base, v); };
  t["case.structure_mesh"] = [](CaseConfig& c, auto&, auto& v, auto& base) { c.structure_mesh = to_path(base, v); };
  t["case.output"] = [](CaseConfig& c, auto&, auto& v, auto& base) { c.output = to_path(base, v); };
  t["case.characteristic_length"] = [](CaseConfig& c, auto& k, auto& v, auto&) {
    c.problem.characteristic_length = to_double(k, v);
  };
  t["case.rigid"] = [](CaseConfig& c, auto& k, auto& v, auto&) { c.rigid = to_bool(k, v); };
  t["case.interface_tag"] = [](CaseConfig& c, auto&, auto& v, auto&) {
    c.problem.interface_tag = trim(v);
    c.problem.fluid_bc.interface_tag = trim(v);
  };
  t["case.dirichlet_tag"] = [](CaseConfig& c, auto&, auto& v, auto&) { c.problem.dirichlet_tag = trim(v); };

  t["flow.density"] = [](CaseConfig& c, auto& k, auto& v, auto&) { c.problem.flow.density = to_double(k, v); };
  t["flow.viscosity"] = [](CaseConfig& c, auto& k, auto& v, auto&) { c.problem.flow.viscosity = to_double(k, v); };
  t["flow.stokes"] = [](CaseConfig& c, auto& k, auto& v, auto&) { c.problem.flow.stokes = to_bool(k, v); };
  t["inflow.v_max"] = [](CaseConfig& c, auto& k, auto& v, auto&) { c.problem.fluid_bc.inflow.v_max = to_double(k, v); };
  t["inflow.y0"] = [](CaseConfig& c, auto& k, auto& v, auto&) { c.problem.fluid_bc.inflow.y0 = to_double(k, v); };
  t["inflow.height"] = [](CaseConfig& c, auto& k, auto& v, auto&) { c.problem.fluid_bc.inflow.height = to_double(k, v); };

  t["fluid.inlet_tag"] = [](CaseConfig& c, auto&, auto& v, auto&) { c.problem.fluid_bc.inlet_tag = trim(v); };
  t["fluid.outlet_tag"] = [](CaseConfig& c, auto&, auto& v, auto&) { c.problem.fluid_bc.outlet_tag = trim(v); };
  t["fluid.wall_tags"] = [](CaseConfig& c, auto&, auto& v, auto&) { c.problem.fluid_bc.wall_tags = split_list(v); };
  t["fluid.newton_rtol"] = [](CaseConfig& c, auto& k, auto& v, auto&) { c.problem.fluid_opts.newton_rtol = to_double(k, v); };
  t["fluid.newton_atol"] = [](CaseConfig& c, auto& k, auto& v, auto&) { c.problem.fluid_opts.newton_atol = to_double(k, v); };
  t["fluid.max_iterations"] = [](CaseConfig& c, auto& k, auto& v, auto&) {
    c.problem.fluid_opts.max_iterations = to_int(k, v);
  };

  t["structure.youngs_modulus"] = [](CaseConfig& c, auto& k, auto& v, auto&) {
    c.problem.material.youngs_modulus = to_double(k, v);
  };
  t["structure.poisson_ratio"] = [](CaseConfig& c, auto& k, auto& v, auto&) {
    c.problem.material.poisson_ratio = to_double(k, v);
  };
  t["structure.density"] = [](CaseConfig& c, auto& k, auto& v, auto&) { c.problem.material.density = to_double(k, v); };
  t["structure.newton_rtol"] = [](CaseConfig& c, auto& k, auto& v, auto&) {
    c.problem.structure_opts.newton_rtol = to_double(k, v);
  };
  t["structure.newton_atol"] = [](CaseConfig& c, auto& k, auto& v, auto&) {
    c.problem.structure_opts.newton_atol = to_double(k, v);
  };
  t["structure.max_iterations"] = [](CaseConfig& c, auto& k, auto& v, auto&) {
    c.problem.structure_opts.max_iterations = to_int(k, v);
  };

  t["mesh_motion.lame_lambda"] = [](CaseConfig& c, auto& k, auto& v, auto&) {
    c.problem.mesh_params.lame_lambda = to_double(k, v);
  };
  t["mesh_motion.lame_mu"] = [](CaseConfig& c, auto& k, auto& v, auto&) { c.problem.mesh_params.lame_mu = to_double(k, v); };
  t["mesh_motion.stiffening_exponent"] = [](CaseConfig& c, auto& k, auto& v, auto&) {
    c.problem.mesh_params.stiffening_exponent = to_double(k, v);
  };

  t["mapping.method"] = [](CaseConfig& c, auto& k, auto& v, auto&) { c.problem.mapping = to_method(k, v); };
  t["mapping.force_mode"] = [](CaseConfig& c, auto& k, auto& v, auto&) { c.problem.force_mode = to_force_mode(k, v); };

  t["coupling.tolerance"] = [](CaseConfig& c, auto& k, auto& v, auto&) { c.coupling.tolerance = to_double(k, v); };
  t["coupling.max_iterations"] = [](CaseConfig& c, auto& k, auto& v, auto&) { c.coupling.max_iterations = to_int(k, v); };
  t["coupling.aitken_initial"] = [](CaseConfig& c, auto& k, auto& v, auto&) { c.coupling.aitken_initial = to_double(k, v); };
  t["coupling.omega_min"] = [](CaseConfig& c, auto& k, auto& v, auto&) { c.coupling.omega_min = to_double(k, v); };
  t["coupling.omega_max"] = [](CaseConfig& c, auto& k, auto& v, auto&) { c.coupling.omega_max = to_double(k, v); };

  t["adjoint.tolerance"] = [](CaseConfig& c, auto& k, auto& v, auto&) { c.coupling.adjoint_tolerance = to_double(k, v); };
  t["adjoint.uncoupled"] = [](CaseConfig& c, auto& k, auto& v, auto&) { c.coupling.uncoupled = to_bool(k, v); };
  t["adjoint.formulation"] = [](CaseConfig& c, auto& k, auto& v, auto&) {
    const auto f = trim(v);
    if (f != "complete" && f != "reduced" && f != "both")
      throw ConfigError(k + ": expected complete, reduced or both, got '" + v + "'");
    c.formulation = f;
  };

  t["fd.step"] = [](CaseConfig& c, auto& k, auto& v, auto&) { c.fd.fd.step = to_double(k, v); };
  t["fd.samples"] = [](CaseConfig& c, auto& k, auto& v, auto&) { c.fd.samples = to_int(k, v); };
  t["fd.nodes"] = [](CaseConfig& c, auto& k, auto& v, auto&) {
    c.fd.fd.sample_nodes.clear();
    for (const auto& p : split_list(v)) c.fd.fd.sample_nodes.push_back(to_int(k, p));
  };
  t["fd.direction"] = [](CaseConfig& c, auto& k, auto& v, auto&) { c.fd.fd.direction = to_direction(k, v); };
  t["fd.tolerance"] = [](CaseConfig& c, auto& k, auto& v, auto&) { c.fd.tolerance = to_double(k, v); };

  t["refine.fluid_meshes"] = [](CaseConfig& c, auto&, auto& v, auto& base) {
    c.refine.fluid_meshes.clear();
    for (const auto& p : split_list(v)) c.refine.fluid_meshes.push_back(to_path(base, p));
  };
  t["refine.structure_meshes"] = [](CaseConfig& c, auto&, auto& v, auto& base) {
    c.refine.structure_meshes.clear();
    for (const auto& p : split_list(v)) c.refine.structure_meshes.push_back(to_path(base, p));
  };
  t["refine.stiffness_scales"] = [](CaseConfig& c, auto& k, auto& v, auto&) {
    c.refine.stiffness_scales = to_doubles(k, v);
  };
  return t;
}

void validate(const CaseConfig& c) {
  c.problem.flow.validate();
  c.problem.material.validate();
  c.problem.mesh_params.validate();
  c.coupling.validate();
  c.fd.fd.validate();
  if (!(c.problem.characteristic_length > 0)) throw ConfigError("case.characteristic_length must be positive");
  if (!(c.fd.tolerance > 0)) throw ConfigError("fd.tolerance must be positive");
  if (c.fd.samples < 0) throw ConfigError("fd.samples must be non-negative");
  if (c.refine.fluid_meshes.size() != c.refine.structure_meshes.size())
    throw ConfigError("refine.fluid_meshes and refine.structure_meshes must list the same number of meshes");
  for (double s : c.refine.stiffness_scales)
    if (!(s > 0)) throw ConfigError("refine.stiffness_scales must be positive");
  for (const auto& o : c.objectives) o.validate();
}

}  // namespace

CaseConfig parse_case_config(std::istream& in, const fs::path& base_dir, const std::string& source) {
  namespace pt = boost::property_tree;
  // Inline comments: a ';' or '#' preceded by whitespace ends the line.
  std::ostringstream cleaned;
  for (std::string line; std::getline(in, line);) {
    for (std::size_t i = 1; i < line.size(); ++i) {
      if ((line[i] == ';' || line[i] == '#') && (line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line.erase(i);
        break;
      }
    }
    cleaned << trim(line) << "\n";
  }
  std::istringstream text(cleaned.str());
  pt::ptree tree;
  try {
    pt::read_ini(text, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(source + ":" + std::to_string(e.line()) + ": " + e.message(), static_cast<int>(e.line()));
  }

  CaseConfig cfg;
  cfg.source = source;
  cfg.output = base_dir / "out";
  static const auto table = make_setters();
  bool drag_direction_set = false;
  Vec2 drag_direction{1.0, 0.0};
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(source + ": key '" + section + "' outside a section");
    for (const auto& [key, node] : body) {
      const std::string full = section + "." + key;
      const auto value = node.get_value<std::string>();
      if (section == "objectives") {
        if (key == "drag_direction") {
          drag_direction = to_vec2(full, value);
          drag_direction_set = true;
          continue;
        }
        ObjectiveSpec spec;
        try {
          spec.kind = parse_objective_kind(key);
        } catch (const ConfigError&) {
          throw ConfigError(source + ": unknown objective '" + key + "'");
        }
        spec.weight = to_double(full, value);
        cfg.objectives.push_back(spec);
        continue;
      }
      auto it = table.find(full);
      if (it == table.end()) throw ConfigError(source + ": unknown setting '" + full + "'");
      it->second(cfg, full, value, base_dir);
    }
  }
  if (drag_direction_set && !(norm(drag_direction) > 0)) throw ConfigError("objectives.drag_direction must be nonzero");
  for (auto& o : cfg.objectives) {
    o.direction = drag_direction;
    o.tag = cfg.problem.interface_tag;
  }
  cfg.problem.fluid_bc.interface_tag = cfg.problem.interface_tag;
  if (cfg.fluid_mesh.empty()) throw ConfigError(source + ": case.fluid_mesh is required");
  if (cfg.structure_mesh.empty()) throw ConfigError(source + ": case.structure_mesh is required");
  validate(cfg);
  return cfg;
}

namespace {

std::string file_digest_input(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw FileError("cannot open file: " + p.string(), p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

CaseConfig load_case_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open config file: " + path.string(), path);
  auto cfg = parse_case_config(in, fs::absolute(path).parent_path(), path.string());
  cfg.source = path;

  std::vector<fs::path> files{cfg.fluid_mesh, cfg.structure_mesh};
  files.insert(files.end(), cfg.refine.fluid_meshes.begin(), cfg.refine.fluid_meshes.end());
  files.insert(files.end(), cfg.refine.structure_meshes.begin(), cfg.refine.structure_meshes.end());
  std::uint64_t h = fnv1a(canonical_text(cfg));
  for (const auto& f : files) {
    if (!fs::is_regular_file(f)) throw FileError("referenced file does not exist: " + f.string(), f);
    h = fnv1a(file_digest_input(f), h);
  }
  cfg.hash = hex64(h);
  return cfg;
}

namespace {

void emit(const CaseConfig& c, const fs::path& base, std::ostream& out) {
  const auto& p = c.problem;
  auto key = [&](const char* k, const std::string& v) { out << k << " = " << v << "\n"; };
  auto paths = [&](const std::vector<fs::path>& v) {
    std::vector<std::string> s;
    for (const auto& x : v) s.push_back(rel(x, base));
    return join(s);
  };
  out << "[case]\n";
  key("fluid_mesh", rel(c.fluid_mesh, base));
  key("structure_mesh", rel(c.structure_mesh, base));
  key("output", rel(c.output, base));
  key("characteristic_length", fmt(p.characteristic_length));
  key("rigid", c.rigid ? "true" : "false");
  key("interface_tag", p.interface_tag);
  key("dirichlet_tag", p.dirichlet_tag);
  out << "\n[flow]\n";
  key("density", fmt(p.flow.density));
  key("viscosity", fmt(p.flow.viscosity));
  key("stokes", p.flow.stokes ? "true" : "false");
  out << "\n[inflow]\n";
  key("v_max", fmt(p.fluid_bc.inflow.v_max));
  key("y0", fmt(p.fluid_bc.inflow.y0));
  key("height", fmt(p.fluid_bc.inflow.height));
  out << "\n[fluid]\n";
  key("inlet_tag", p.fluid_bc.inlet_tag);
  key("outlet_tag", p.fluid_bc.outlet_tag);
  key("wall_tags", join(p.fluid_bc.wall_tags));
  key("newton_rtol", fmt(p.fluid_opts.newton_rtol));
  key("newton_atol", fmt(p.fluid_opts.newton_atol));
  key("max_iterations", std::to_string(p.fluid_opts.max_iterations));
  out << "\n[structure]\n";
  key("youngs_modulus", fmt(p.material.youngs_modulus));
  key("poisson_ratio", fmt(p.material.poisson_ratio));
  key("density", fmt(p.material.density));
  key("newton_rtol", fmt(p.structure_opts.newton_rtol));
  key("newton_atol", fmt(p.structure_opts.newton_atol));
  key("max_iterations", std::to_string(p.structure_opts.max_iterations));
  out << "\n[mesh_motion]\n";
  key("lame_lambda", fmt(p.mesh_params.lame_lambda));
  key("lame_mu", fmt(p.mesh_params.lame_mu));
  key("stiffening_exponent", fmt(p.mesh_params.stiffening_exponent));
  out << "\n[mapping]\n";
  key("method", p.mapping == MappingMethod::mortar ? "mortar" : "nearest_element");
  key("force_mode", p.force_mode == ForceMode::consistent ? "consistent" : "conservative");
  out << "\n[coupling]\n";
  key("tolerance", fmt(c.coupling.tolerance));
  key("max_iterations", std::to_string(c.coupling.max_iterations));
  key("aitken_initial", fmt(c.coupling.aitken_initial));
  key("omega_min", fmt(c.coupling.omega_min));
  key("omega_max", fmt(c.coupling.omega_max));
  out << "\n[adjoint]\n";
  key("tolerance", fmt(c.coupling.adjoint_tolerance));
  key("formulation", c.formulation);
  key("uncoupled", c.coupling.uncoupled ? "true" : "false");
  out << "\n[objectives]\n";
  for (const auto& o : c.objectives) out << to_string(o.kind) << " = " << fmt(o.weight) << "\n";
  if (!c.objectives.empty())
    key("drag_direction", fmt(c.objectives[0].direction.x) + " " + fmt(c.objectives[0].direction.y));
  out << "\n[fd]\n";
  key("step", fmt(c.fd.fd.step));
  key("samples", std::to_string(c.fd.samples));
  if (!c.fd.fd.sample_nodes.empty()) {
    std::vector<std::string> s;
    for (int n : c.fd.fd.sample_nodes) s.push_back(std::to_string(n));
    key("nodes", join(s));
  }
  key("direction", name(c.fd.fd.direction));
  key("tolerance", fmt(c.fd.tolerance));
  if (!c.refine.fluid_meshes.empty()) {
    out << "\n[refine]\n";
    key("fluid_meshes", paths(c.refine.fluid_meshes));
    key("structure_meshes", paths(c.refine.structure_meshes));
    key("stiffness_scales", join_doubles(c.refine.stiffness_scales));
  }
}

}  // namespace

std::string canonical_text(const CaseConfig& cfg) {
  std::ostringstream out;
  fs::path base = cfg.source.empty() ? fs::path{} : fs::absolute(cfg.source).parent_path();
  emit(cfg, base, out);
  return out.str();
}

void write_case_config(const CaseConfig& cfg, std::ostream& out) { out << canonical_text(cfg); }

FsiProblem load_problem(const CaseConfig& cfg) { return load_problem(cfg, cfg.fluid_mesh, cfg.structure_mesh); }

FsiProblem load_problem(const CaseConfig& cfg, const fs::path& fluid_mesh, const fs::path& structure_mesh) {
  FsiProblem p = cfg.problem;
  for (const auto& f : {fluid_mesh, structure_mesh})
    if (!fs::is_regular_file(f)) throw FileError("mesh file does not exist: " + f.string(), f);
  p.fluid_mesh = load_mesh(fluid_mesh);
  p.structure_mesh = load_mesh(structure_mesh);
  return p;
}

}  // namespace afsi::cli
