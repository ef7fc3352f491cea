#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "afsi/errors.hpp"
#include "afsi/verify.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace afsi;

namespace {

CouplingConfig tight() {
  CouplingConfig c;
  c.tolerance = 1e-12;
  c.adjoint_tolerance = 1e-12;
  return c;
}

const std::vector<std::vector<ObjectiveSpec>>& objective_sets() {
  static const std::vector<std::vector<ObjectiveSpec>> sets = {{{ObjectiveKind::interface_drag}},
                                                               {{ObjectiveKind::power_loss}},
                                                               {{ObjectiveKind::interface_energy_fluid}}};
  return sets;
}

std::vector<double> normal_gradient(const FsiSystem& sys, const FsiEquilibrium& eq,
                                    const std::vector<ObjectiveSpec>& obj, const CouplingConfig& cfg) {
  const auto bundle = run_adjoint_fsi(sys, eq, obj, cfg);
  return assemble_coupled_sensitivity(sys, bundle, default_design_nodes(sys)).normal_component;
}

std::vector<double> gradient_vs_cd(const FsiProblem& p, const CouplingConfig& cfg) {
  FsiSystem sys(p);
  const auto eq = run_fsi(sys, cfg);
  const auto cd = central_difference_gradient(p, objective_sets(), cfg, FdConfig{}, &eq);
  std::vector<double> errors;
  for (std::size_t s = 0; s < objective_sets().size(); ++s) {
    std::vector<double> ref;
    for (const auto& c : cd) {
      REQUIRE(c.ok);
      ref.push_back(c.values[s]);
    }
    errors.push_back(relative_l2_error(normal_gradient(sys, eq, objective_sets()[s], cfg), ref));
  }
  return errors;
}

}  // namespace

TEST_CASE("aitken update") {
  CHECK(aitken_update({1, 0}, {0.5, 0}, 0.5, 0.01, 2.0) == doctest::Approx(1.0));
  CHECK(aitken_update({1, 0}, {0.5, 0}, 0.5, 0.01, 0.8) == doctest::Approx(0.8));
  // residual grew: the raw update is negative and clamps to the lower bound
  CHECK(aitken_update({1, 0}, {2, 0}, 0.5, 0.05, 1.0) == doctest::Approx(0.05));
  CHECK(aitken_update({0, 0}, {0, 0}, 0.3, 0.01, 1.0) == 0.3);
  CHECK_THROWS_AS(aitken_update({1, 0}, {1, 0}, 0.3, 0.01, 1.0), ConvergenceError);
  CHECK_THROWS_AS(aitken_update({1, 0}, {1}, 0.3, 0.01, 1.0), ValidationError);
}

TEST_CASE("coupling config validation") {
  CouplingConfig c;
  CHECK_NOTHROW(c.validate());
  c.tolerance = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.aitken_initial = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.omega_min = 2.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.max_iterations = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("equilibrium invariants") {
  FsiSystem sys(flexible_floor(12, 3, 7));
  const auto eq = run_fsi(sys, tight());
  CHECK(eq.iterations > 1);
  CHECK(eq.kappa > 0.01);
  CHECK(eq.residual_history.back() <= 1e-12 * eq.residual_history.front() + 1e-14);

  const auto& fluid = sys.fluid();
  const auto r = residual_fluid(fluid, eq.fluid_coords, eq.fluid.w);
  CHECK(norm2(r) < 1e-8);

  const auto& mesh = sys.problem().fluid_mesh;
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    CHECK(norm(eq.fluid_coords[n] - mesh.nodes[n] - eq.mesh_displacement[n]) < 1e-14);
  }
  const auto relaxed = sys.maps().displacement_to_fluid(eq.interface_displacement);
  const auto mapped = sys.maps().displacement_to_fluid(eq.structure.u);
  for (int n : sys.fluid_interface()) {
    CHECK(norm(eq.mesh_displacement[n] - relaxed[n]) < 1e-14);
    CHECK(norm(mapped[n] - relaxed[n]) < 1e-9);
  }
  const auto load = sys.maps().force_to_structure(eq.interface_forces);
  for (int n : sys.structure_interface()) CHECK(norm(load[n] - eq.structure.f_ext[n]) < 1e-12);
  for (int n : sys.structure_dirichlet()) CHECK(norm(eq.structure.u[n]) == 0.0);

  // the channel pressure pushes the plate down, away from the flow
  double min_uy = 0.0;
  for (const auto& u : eq.structure.u) min_uy = std::min(min_uy, u.y);
  CHECK(min_uy < -0.01);
}

TEST_CASE("fixed point does not depend on the initial relaxation") {
  FsiSystem sys(flexible_floor());
  auto a = tight(), b = tight();
  a.aitken_initial = 0.2;
  b.aitken_initial = 0.5;
  const auto ea = run_fsi(sys, a);
  const auto eb = run_fsi(sys, b);
  CHECK(oracle::rel_diff(flatten(ea.structure.u), flatten(eb.structure.u)) < 1e-10);
  CHECK(oracle::rel_diff(ea.fluid.w, eb.fluid.w) < 1e-10);
}

TEST_CASE("near-rigid structure converges at once") {
  FsiSystem sys(flexible_floor(12, 3, 12, 1000.0 * 1e6));
  const auto eq = run_fsi(sys, tight());
  CHECK(eq.iterations <= 3);
  CHECK(eq.kappa < 1e-6);
}

TEST_CASE("warm start from the equilibrium") {
  FsiSystem sys(flexible_floor());
  const auto eq = run_fsi(sys, tight());
  const auto again = run_fsi(sys, tight(), &eq);
  CHECK(again.iterations <= 2);
  CHECK(oracle::rel_diff(flatten(again.structure.u), flatten(eq.structure.u)) < 1e-10);
}

TEST_CASE("iteration limit raises a convergence error with history") {
  FsiSystem sys(flexible_floor());
  auto cfg = tight();
  cfg.max_iterations = 2;
  try {
    run_fsi(sys, cfg);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.history().size() == 2);
  }
}

TEST_CASE("adjoint gradients match central differences") {
  SUBCASE("matching interface") {
    for (double e : gradient_vs_cd(flexible_floor(12, 3, 12), tight())) CHECK(e < 1e-4);
  }
  SUBCASE("nearest element, non-matching") {
    for (double e : gradient_vs_cd(flexible_floor(12, 3, 7), tight())) CHECK(e < 1e-4);
  }
  SUBCASE("mortar, non-matching") {
    auto p = flexible_floor(12, 3, 7);
    p.mapping = MappingMethod::mortar;
    for (double e : gradient_vs_cd(p, tight())) CHECK(e < 1e-4);
  }
  SUBCASE("consistent force transfer") {
    auto p = flexible_floor(12, 3, 7);
    p.force_mode = ForceMode::consistent;
    for (double e : gradient_vs_cd(p, tight())) CHECK(e < 1e-4);
  }
}

TEST_CASE("zero objective weight gives a zero adjoint") {
  FsiSystem sys(flexible_floor());
  const auto eq = run_fsi(sys, tight());
  ObjectiveSpec spec{ObjectiveKind::interface_drag};
  spec.weight = 0.0;
  const auto b = run_adjoint_fsi(sys, eq, {spec}, tight());
  CHECK(b.iterations == 1);
  CHECK(oracle::norm(b.psi_fluid) == 0.0);
  CHECK(norm(b.psi_structure) == 0.0);
  CHECK(norm(b.psi_mesh) == 0.0);
}

TEST_CASE("adjoint is linear in the objective weight") {
  FsiSystem sys(flexible_floor(12, 3, 7));
  const auto eq = run_fsi(sys, tight());
  for (const auto& set : objective_sets()) {
    const auto b1 = run_adjoint_fsi(sys, eq, set, tight());
    const auto g1 = assemble_coupled_sensitivity(sys, b1, default_design_nodes(sys)).normal_component;
    for (double c : {3.5, -0.25, 1e3}) {
      auto scaled = set;
      scaled[0].weight = c;
      const auto b2 = run_adjoint_fsi(sys, eq, scaled, tight());
      auto unscale = [c](std::vector<double> v) {
        for (auto& x : v) x /= c;
        return v;
      };
      CHECK(oracle::rel_diff(unscale(b2.psi_fluid), b1.psi_fluid) < 1e-10);
      CHECK(oracle::rel_diff(unscale(flatten(b2.psi_structure)), flatten(b1.psi_structure)) < 1e-10);
      CHECK(oracle::rel_diff(unscale(flatten(b2.psi_mesh)), flatten(b1.psi_mesh)) < 1e-10);
      const auto g2 = assemble_coupled_sensitivity(sys, b2, default_design_nodes(sys)).normal_component;
      CHECK(oracle::rel_diff(unscale(g2), g1) < 1e-10);
    }
  }
}

TEST_CASE("complete and reduced agree without interior fluid nodes") {
  FsiSystem sys(flexible_floor(12, 1, 12));
  const auto eq = run_fsi(sys, tight());
  auto reduced = tight();
  reduced.formulation = Formulation::reduced;
  for (const auto& set : objective_sets()) {
    const auto gc = normal_gradient(sys, eq, set, tight());
    const auto gr = normal_gradient(sys, eq, set, reduced);
    CHECK(oracle::rel_diff(gr, gc) < 1e-10);
  }
}

TEST_CASE("reduced formulation differs on a layered mesh") {
  FsiSystem sys(flexible_floor(12, 4, 12));
  const auto eq = run_fsi(sys, tight());
  auto reduced = tight();
  reduced.formulation = Formulation::reduced;
  const auto& set = objective_sets()[0];
  const auto gc = normal_gradient(sys, eq, set, tight());
  const auto gr = normal_gradient(sys, eq, set, reduced);
  CHECK(oracle::rel_diff(gr, gc) > 1e-4);
}

TEST_CASE("uncoupled adjoint approaches the coupled one for a stiff structure") {
  auto soft = tight(), unc = tight();
  unc.uncoupled = true;
  for (double scale : {1.0, 1e4}) {
    FsiSystem sys(flexible_floor(12, 3, 12, 1000.0 * scale));
    const auto eq = run_fsi(sys, tight());
    const auto b = run_adjoint_fsi(sys, eq, objective_sets()[0], unc);
    CHECK(b.uncoupled);
    CHECK(b.iterations == 1);
    CHECK(norm(b.psi_structure) == 0.0);
    const auto gu = assemble_coupled_sensitivity(sys, b, default_design_nodes(sys)).normal_component;
    const auto gc = normal_gradient(sys, eq, objective_sets()[0], soft);
    const double diff = oracle::rel_diff(gu, gc);
    if (scale == 1.0) CHECK(diff > 1e-2);
    else CHECK(diff < 1e-3);
  }
}

TEST_CASE("design set and normals") {
  FsiSystem sys(flexible_floor());
  const auto design = default_design_nodes(sys);
  // interface minus the two corner nodes shared with inlet and outlet
  CHECK(design.size() == sys.fluid_interface().size() - 2);
  const auto normals = design_normals(sys);
  for (int n : design) {
    CHECK(normals[n].x == doctest::Approx(0.0));
    CHECK(normals[n].y == doctest::Approx(1.0));
  }

  const auto eq = run_fsi(sys, tight());
  const auto b = run_adjoint_fsi(sys, eq, objective_sets()[0], tight());
  const auto wall = sys.problem().fluid_mesh.nodes_with_tag("wall");
  CHECK_THROWS_AS(assemble_coupled_sensitivity(sys, b, {wall[3]}), ValidationError);
}

TEST_CASE("project to normal") {
  const auto p = project_to_normal({{1, 2}, {3, -1}}, {{0, 1}, {std::sqrt(0.5), std::sqrt(0.5)}});
  REQUIRE(p.size() == 2);
  CHECK(p[0] == doctest::Approx(2.0));
  CHECK(p[1] == doctest::Approx(2.0 * std::sqrt(0.5)));
}

TEST_CASE("history csv") {
  const auto path = std::filesystem::temp_directory_path() / "afsi_history_test.csv";
  write_history_csv(path, {1.0, 0.1, 0.01}, {2.0, 0.2}, "hash abc");
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  std::filesystem::remove(path);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == "# hash abc");
  CHECK(lines[1] == "iter,primal_residual,adjoint_residual");
  CHECK(lines[4].rfind("3,", 0) == 0);
}
