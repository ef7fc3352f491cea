#include <doctest.h>

#include <cmath>
#include <fstream>

#include "afsi/errors.hpp"
#include "afsi/verify.hpp"
#include "fixtures.hpp"

using namespace afsi;

namespace {

// Sum of squared undeformed coordinates of the fluid interface nodes.
double interface_moment(const FsiProblem& p) {
  double s = 0.0;
  for (int n : p.fluid_mesh.nodes_with_tag("interface")) s += dot(p.fluid_mesh.nodes[n], p.fluid_mesh.nodes[n]);
  return s;
}

CouplingConfig tight() {
  CouplingConfig c;
  c.tolerance = 1e-12;
  c.adjoint_tolerance = 1e-12;
  return c;
}

}  // namespace

TEST_CASE("relative l2 error") {
  CHECK(relative_l2_error({1, 2}, {1, 2}) == 0.0);
  CHECK(relative_l2_error({0, 0}, {3, 4}) == doctest::Approx(1.0));
  CHECK(relative_l2_error({3, 5}, {3, 4}) == doctest::Approx(0.2));
  CHECK_THROWS_AS(relative_l2_error({1}, {0}), ValidationError);
  CHECK_THROWS_AS(relative_l2_error({1, 2}, {1}), ValidationError);
}

TEST_CASE("fd config validation") {
  FdConfig fd;
  CHECK_NOTHROW(fd.validate());
  fd.step = 0;
  CHECK_THROWS_AS(fd.validate(), ConfigError);
}

TEST_CASE("perturbed problem moves fluid and structure interface") {
  const auto base = flexible_floor(12, 3, 7);
  FsiSystem sys(base);
  const int node = default_design_nodes(sys)[4];
  const auto p = perturbed_problem(base, sys.maps().hs, node, {0.0, 1e-3});
  CHECK(p.fluid_mesh.nodes[node].y == doctest::Approx(1e-3));
  int moved = 0;
  double total = 0.0;
  for (int n = 0; n < base.structure_mesh.num_nodes(); ++n) {
    const Vec2 d = p.structure_mesh.nodes[n] - base.structure_mesh.nodes[n];
    if (norm(d) > 0) {
      ++moved;
      total += d.y;
      CHECK(d.x == 0.0);
    }
  }
  CHECK(moved >= 1);
  CHECK(moved <= 2);
  CHECK(total == doctest::Approx(1e-3));
}

TEST_CASE("central difference of synthetic functionals") {
  const auto base = flexible_floor();
  FsiSystem sys(base);
  const auto design = default_design_nodes(sys);

  SUBCASE("constant") {
    const auto s = central_difference(base, FdConfig{}, [](const FsiProblem&) { return std::vector<double>{4.2}; });
    REQUIRE(s.size() == design.size());
    for (const auto& x : s) CHECK(x.values[0] == 0.0);
  }
  SUBCASE("quadratic moment, every direction") {
    for (auto dir : {FdDirection::normal, FdDirection::x, FdDirection::y}) {
      FdConfig fd;
      fd.direction = dir;
      const auto s = central_difference(base, fd, [](const FsiProblem& p) {
        return std::vector<double>{interface_moment(p)};
      });
      for (const auto& x : s) CHECK(x.values[0] == doctest::Approx(2.0 * dot(x.point, x.direction)).epsilon(1e-8));
    }
  }
  SUBCASE("second-order truncation error") {
    // J = sum x^3: central difference error is eps^2 x per node
    auto cubic = [](const FsiProblem& p) {
      double s = 0.0;
      for (int n : p.fluid_mesh.nodes_with_tag("interface")) s += std::pow(p.fluid_mesh.nodes[n].x, 3);
      return std::vector<double>{s};
    };
    FdConfig fd;
    fd.direction = FdDirection::x;
    fd.sample_nodes = {design[5]};
    const double x = base.fluid_mesh.nodes[design[5]].x;
    double prev = 0.0;
    for (double h : {1e-2, 5e-3}) {
      fd.step = h;
      const double err = std::abs(central_difference(base, fd, cubic)[0].values[0] - 3 * x * x);
      CHECK(err == doctest::Approx(h * h).epsilon(1e-5));
      if (prev > 0) CHECK(prev / err == doctest::Approx(4.0).epsilon(1e-4));
      prev = err;
    }
  }
  SUBCASE("numerical failures are flagged") {
    const auto s = central_difference(base, FdConfig{}, [](const FsiProblem&) -> std::vector<double> {
      throw SolverError("synthetic failure");
    });
    for (const auto& x : s) {
      CHECK_FALSE(x.ok);
      CHECK(x.message.find("synthetic") != std::string::npos);
    }
  }
  SUBCASE("input errors propagate") {
    CHECK_THROWS_AS(central_difference(base, FdConfig{}, [](const FsiProblem&) -> std::vector<double> {
                      throw ConfigError("bad");
                    }),
                    ConfigError);
    FdConfig fd;
    fd.sample_nodes = {base.fluid_mesh.nodes_with_tag("wall")[2]};
    CHECK_THROWS_AS(central_difference(base, fd, [](const FsiProblem&) { return std::vector<double>{0.0}; }),
                    ValidationError);
  }
}

TEST_CASE("refinement study") {
  const std::vector<ObjectiveSpec> objectives = {{ObjectiveKind::interface_drag}, {ObjectiveKind::power_loss}};
  SUBCASE("identical formulations give zero difference") {
    const auto rows = refinement_study({flexible_floor()}, {1.0}, objectives, tight(),
                                       {Formulation::complete, Formulation::complete});
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
      CHECK(r.ok);
      CHECK(r.formulation_error == 0.0);
      CHECK(r.kappa > 0.0);
    }
  }
  SUBCASE("levels and stiffness scales") {
    const auto rows = refinement_study({flexible_floor(12, 3), flexible_floor(24, 6, 24)}, {1.0, 10.0}, objectives,
                                       tight());
    REQUIRE(rows.size() == 8);
    CHECK(rows[0].level == 0);
    CHECK(rows[7].level == 1);
    CHECK(rows[0].interface_edges == 12);
    CHECK(rows[7].interface_edges == 24);
    // the stiffer plate deflects less
    CHECK(rows[2].kappa < rows[0].kappa);
    for (const auto& r : rows) {
      CHECK(r.ok);
      CHECK(r.formulation_error > 0.0);
      CHECK(r.formulation_error < 1.0);
    }

    const auto path = std::filesystem::temp_directory_path() / "afsi_refine_test.csv";
    write_refinement_csv(path, rows, "hash 1");
    std::ifstream in(path);
    std::size_t count = 0;
    for (std::string l; std::getline(in, l);) ++count;
    std::filesystem::remove(path);
    CHECK(count == 10);
  }
}
