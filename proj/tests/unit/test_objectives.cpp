#include <doctest.h>

#include <random>

#include "afsi/cases.hpp"
#include "afsi/errors.hpp"
#include "afsi/objectives.hpp"
#include "oracles.hpp"

using namespace afsi;

namespace {

FluidSetup setup_for(const Mesh2D& m, double mu = 0.1, double rho = 1.0) {
  FluidSetup s;
  s.mesh = &m;
  s.params = {rho, mu, false};
  s.bc.inflow = {1.0, 0.0, 1.0};
  return s;
}

FluidState random_state(std::size_t nodes, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(-1, 1);
  FluidState st;
  st.w.resize(3 * nodes);
  for (auto& v : st.w) v = d(rng);
  return st;
}

struct Pair {
  Mesh2D fluid = rectangle_mesh(0, 0, 1, 1, 10, 4, {"interface", "outlet", "wall", "inlet"});
  Mesh2D solid = rectangle_mesh(0, -0.5, 1, 0, 7, 2, {"dirichlet", "", "interface", ""});
};

}  // namespace

TEST_CASE("interface drag") {
  CHECK(eval_interface_drag(VecField(4), {1.0, 0.0}) == 0.0);
  CHECK(eval_interface_drag({{1.0, 0.0}, {2.0, 0.0}}, {1.0, 0.0}) == 3.0);
  CHECK(eval_interface_drag({{1.0, 5.0}, {2.0, -1.0}}, {0.0, 1.0}) == 4.0);
}

TEST_CASE("power loss values") {
  auto m = rectangle_mesh(0, 0, 2, 1, 8, 4, {"wall", "outlet", "wall", "inlet"});
  auto s = setup_for(m, 0.1, 1.3);
  FluidState st;
  st.w.assign(3 * m.nodes.size(), 0.0);
  CHECK(eval_power_loss(s, m.nodes, st) == 0.0);

  // Uniform plug flow without pressure: inflow and outflow of kinetic energy cancel.
  for (int i = 0; i < m.num_nodes(); ++i) st.w[3 * i] = 0.7;
  CHECK(std::abs(eval_power_loss(s, m.nodes, st)) <= 1e-14);

  // A pressure drop alone gives p_drop * flux.
  for (int i = 0; i < m.num_nodes(); ++i) st.w[3 * i + 2] = 3.0 - m.nodes[i].x;
  CHECK(eval_power_loss(s, m.nodes, st) == doctest::Approx(2.0 * 0.7 * 1.0).epsilon(1e-12));
}

TEST_CASE("power loss of Poiseuille flow equals viscous dissipation") {
  const double L = 2.0, H = 1.0, U = 0.8, mu = 0.05;
  // Dissipation of u = 4U y (H - y) / H^2 over the channel: 16 mu L U^2 / (3 H).
  const double exact = 16.0 * mu * L * U * U / (3.0 * H);
  double prev = 1.0;
  for (int ny : {4, 8, 16, 32}) {
    auto m = rectangle_mesh(0, 0, L, H, 2 * ny, ny, {"wall", "outlet", "wall", "inlet"});
    auto s = setup_for(m, mu, 1.1);
    const double G = 8.0 * mu * U / (H * H);
    FluidState st;
    st.w.assign(3 * m.nodes.size(), 0.0);
    for (int i = 0; i < m.num_nodes(); ++i) {
      const Vec2 x = m.nodes[i];
      st.w[3 * i] = 4.0 * U * x.y * (H - x.y) / (H * H);
      st.w[3 * i + 2] = G * (L - x.x);
    }
    const double err = std::abs(eval_power_loss(s, m.nodes, st) - exact) / exact;
    CHECK(err < prev);
    prev = err;
    if (ny == 32) CHECK(err <= 0.05);
  }
}

TEST_CASE("power loss partials match central differences") {
  auto m = rectangle_mesh(0, 0, 2, 1, 5, 3, {"wall", "outlet", "wall", "inlet"});
  auto s = setup_for(m, 0.1, 1.2);
  VecField x = m.nodes;
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> d(-0.05, 0.05);
  for (auto& p : x) p += Vec2{d(rng), d(rng)};
  auto st = random_state(m.nodes.size(), 11);
  auto part = power_loss_partials(s, x, st);

  const double h = 1e-6;
  std::vector<double> fd_w(st.w.size());
  for (std::size_t k = 0; k < st.w.size(); ++k) {
    auto a = st, b = st;
    a.w[k] += h;
    b.w[k] -= h;
    fd_w[k] = (eval_power_loss(s, x, a) - eval_power_loss(s, x, b)) / (2 * h);
  }
  CHECK(oracle::rel_diff(part.dw, fd_w) <= 1e-6);

  std::vector<double> fd_x, an_x;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (int c = 0; c < 2; ++c) {
      auto a = x, b = x;
      a[i][c] += h;
      b[i][c] -= h;
      fd_x.push_back((eval_power_loss(s, a, st) - eval_power_loss(s, b, st)) / (2 * h));
      an_x.push_back(part.dx[i][c]);
    }
  CHECK(oracle::rel_diff(an_x, fd_x) <= 1e-6);
}

TEST_CASE("interface energy on both sides") {
  Pair p;
  VecField u(p.solid.num_nodes()), f(p.fluid.num_nodes());
  const auto fi = p.fluid.nodes_with_tag("interface");
  for (int i : fi) f[i] = {std::sin(1.0 * i), 0.3 + 0.01 * i};
  for (auto m : {MappingMethod::nearest_element, MappingMethod::mortar}) {
    const auto cons = build_interface_maps(p.fluid, p.solid, m, ForceMode::conservative);
    CHECK(eval_interface_energy(u, f, cons, EnergySide::fluid) == 0.0);
    CHECK(eval_interface_energy(u, f, cons, EnergySide::structure) == 0.0);
    for (int i = 0; i < p.solid.num_nodes(); ++i) u[i] = {0.01 * p.solid.nodes[i].x, -0.02 * std::cos(p.solid.nodes[i].x)};
    const double ef = eval_interface_energy(u, f, cons, EnergySide::fluid);
    const double es = eval_interface_energy(u, f, cons, EnergySide::structure);
    CHECK(std::abs(ef - es) <= 1e-12 * std::abs(ef));
    const auto incons = build_interface_maps(p.fluid, p.solid, m, ForceMode::consistent);
    CHECK(std::abs(eval_interface_energy(u, f, incons, EnergySide::structure) - es) > 1e-8 * std::abs(es));
    std::fill(u.begin(), u.end(), Vec2{});
  }

  SUBCASE("matching meshes reduce to u . f") {
    auto solid = rectangle_mesh(0, -0.5, 1, 0, 10, 2, {"dirichlet", "", "interface", ""});
    const auto maps = build_interface_maps(p.fluid, solid, MappingMethod::mortar, ForceMode::consistent);
    CHECK(maps.hs.matching);
    VecField us(solid.num_nodes());
    double direct = 0.0;
    for (int i = 0; i < solid.num_nodes(); ++i) us[i] = {0.1 * i, -0.05};
    for (int i : fi)
      for (int j = 0; j < solid.num_nodes(); ++j)
        if (norm(solid.nodes[j] - p.fluid.nodes[i]) < 1e-12) direct += dot(us[j], f[i]);
    CHECK(eval_interface_energy(us, f, maps, EnergySide::fluid) == doctest::Approx(direct).epsilon(1e-14));
    CHECK(eval_interface_energy(us, f, maps, EnergySide::structure) == doctest::Approx(direct).epsilon(1e-14));
  }
}

TEST_CASE("objective partials") {
  Pair p;
  auto s = setup_for(p.fluid);
  auto st = random_state(p.fluid.nodes.size(), 3);
  const auto maps = build_interface_maps(p.fluid, p.solid, MappingMethod::mortar, ForceMode::consistent);
  VecField u(p.solid.num_nodes());
  for (int i = 0; i < p.solid.num_nodes(); ++i) u[i] = {0.02 * i, 0.01 * std::sin(1.0 * i)};
  const auto f = interface_forces(s, p.fluid.nodes, st);
  ObjectiveContext ctx{s, p.fluid.nodes, st, u, f, maps};
  const auto fi = p.fluid.nodes_with_tag("interface");

  SUBCASE("drag carries the direction on interface nodes") {
    ObjectiveSpec drag{ObjectiveKind::interface_drag, 2.0, {0.6, 0.8}};
    auto part = objective_partials(drag, ctx);
    for (int i = 0; i < p.fluid.num_nodes(); ++i) {
      const bool on = std::find(fi.begin(), fi.end(), i) != fi.end();
      CHECK(part.fluid.d[i] == (on ? Vec2{1.2, 1.6} : Vec2{}));
    }
    CHECK(norm(part.du_structure) == 0.0);
    CHECK(drag.weight * eval_objective(drag, ctx) == doctest::Approx(dot(part.fluid.d, f)).epsilon(1e-13));
  }
  SUBCASE("interface energies are bilinear") {
    for (auto kind : {ObjectiveKind::interface_energy_fluid, ObjectiveKind::interface_energy_structure}) {
      ObjectiveSpec e{kind, 1.0};
      auto part = objective_partials(e, ctx);
      const double J = eval_objective(e, ctx);
      CHECK(dot(part.fluid.d, f) == doctest::Approx(J).epsilon(1e-13));
      CHECK(dot(part.du_structure, u) == doctest::Approx(J).epsilon(1e-13));
      // Central differences in u.
      std::vector<double> fd, an;
      for (int i = 0; i < p.solid.num_nodes(); ++i)
        for (int c = 0; c < 2; ++c) {
          auto a = u, b = u;
          a[i][c] += 1e-6;
          b[i][c] -= 1e-6;
          ObjectiveContext ca{s, p.fluid.nodes, st, a, f, maps}, cb{s, p.fluid.nodes, st, b, f, maps};
          fd.push_back((eval_objective(e, ca) - eval_objective(e, cb)) / 2e-6);
          an.push_back(part.du_structure[i][c]);
        }
      CHECK(oracle::rel_diff(an, fd) <= 1e-6);
    }
    ObjectiveSpec ef{ObjectiveKind::interface_energy_fluid, 1.0};
    auto part = objective_partials(ef, ctx);
    CHECK(part.du_structure == maps.hs_transpose(f));
  }
  SUBCASE("weighted sums") {
    std::vector<ObjectiveSpec> specs{{ObjectiveKind::interface_drag, 0.5},
                                     {ObjectiveKind::power_loss, -2.0},
                                     {ObjectiveKind::interface_energy_structure, 3.0}};
    double sum = 0.0;
    for (const auto& sp : specs) sum += sp.weight * eval_objective(sp, ctx);
    CHECK(eval_objectives(specs, ctx) == doctest::Approx(sum).epsilon(1e-14));
    auto total = objective_partials(specs, ctx);
    auto pl = power_loss_partials(s, p.fluid.nodes, st);
    for (std::size_t k = 0; k < pl.dw.size(); ++k) CHECK(total.fluid.dJ_dw[k] == doctest::Approx(-2.0 * pl.dw[k]));
  }
}

TEST_CASE("objective configuration errors") {
  CHECK_THROWS_AS(parse_objective_kind("lift"), ConfigError);
  CHECK(parse_objective_kind("power_loss") == ObjectiveKind::power_loss);
  CHECK(parse_objective_kind(to_string(ObjectiveKind::interface_energy_fluid)) == ObjectiveKind::interface_energy_fluid);
  ObjectiveSpec bad{ObjectiveKind::interface_drag, 1.0, {1.0, 1.0}};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  ObjectiveSpec nan{ObjectiveKind::power_loss, std::nan("")};
  CHECK_THROWS_AS(nan.validate(), ConfigError);
}
