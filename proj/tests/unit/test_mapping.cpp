#include <doctest.h>

#include <cmath>
#include <numbers>

#include "afsi/cases.hpp"
#include "afsi/errors.hpp"
#include "afsi/mapping.hpp"
#include "oracles.hpp"

using namespace afsi;

namespace {

InterfaceCurve polyline(const VecField& pts) {
  InterfaceCurve c;
  c.tag = "interface";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    c.nodes.push_back(static_cast<int>(i));
    c.points.push_back(pts[i]);
    if (i + 1 < pts.size()) c.edges.push_back({static_cast<int>(i), static_cast<int>(i + 1)});
  }
  c.mesh_size = static_cast<int>(pts.size());
  return c;
}

InterfaceCurve straight(double x0, double x1, int n) {
  VecField p;
  for (int i = 0; i <= n; ++i) p.push_back({x0 + (x1 - x0) * i / n, 0.0});
  return polyline(p);
}

InterfaceCurve graded(int n) {
  VecField p;
  for (int i = 0; i <= n; ++i) {
    const double s = static_cast<double>(i) / n;
    p.push_back({s * s, 0.0});
  }
  return polyline(p);
}

InterfaceCurve arc(int n) {
  VecField p;
  for (int i = 0; i <= n; ++i) {
    const double t = 0.5 * std::numbers::pi * i / n;
    p.push_back({std::cos(t), std::sin(t)});
  }
  return polyline(p);
}

double max_row_sum_error(const SparseMatrix& H) {
  double worst = 0.0;
  for (int r = 0; r < H.rows(); ++r) {
    double s = 0.0;
    for (int k = H.row_offsets()[r]; k < H.row_offsets()[r + 1]; ++k) s += H.values()[k];
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

VecField field(const InterfaceCurve& c, double (*f)(const Vec2&)) {
  VecField v(c.mesh_size);
  for (std::size_t i = 0; i < c.nodes.size(); ++i) v[c.nodes[i]] = {f(c.points[i]), -2.0 * f(c.points[i])};
  return v;
}

// Linear interpolation of nodal values along a straight source polyline sorted by x.
double interpolate_oracle(const InterfaceCurve& s, const std::vector<double>& vals, double x) {
  if (x <= s.points.front().x) return vals.front();
  if (x >= s.points.back().x) return vals.back();
  for (std::size_t i = 0; i + 1 < s.points.size(); ++i) {
    const double a = s.points[i].x, b = s.points[i + 1].x;
    if (x >= a && x <= b) return vals[i] + (vals[i + 1] - vals[i]) * (x - a) / (b - a);
  }
  return NAN;
}

}  // namespace

TEST_CASE("identical discretizations give the identity") {
  const auto c = arc(9);
  for (auto m : {MappingMethod::nearest_element, MappingMethod::mortar}) {
    const auto op = build_mapping(c, c, m);
    CHECK(op.matching);
    CHECK(op.H.nonzeros() == static_cast<int>(c.points.size()));
    for (int i = 0; i < op.H.rows(); ++i) CHECK(op.H.at(i, i) == 1.0);
  }
  // Matching detection does not depend on node order.
  VecField rev(c.points.rbegin(), c.points.rend());
  const auto op = build_nearest_element(c, polyline(rev));
  CHECK(op.matching);
  CHECK(op.H.at(0, static_cast<int>(c.points.size()) - 1) == 1.0);
}

TEST_CASE("nearest element weights") {
  const auto src = straight(0.0, 1.0, 2);
  const auto tgt = polyline({{0.25, 0.0}, {0.5, 0.0}, {0.6, 0.0}});
  const auto op = build_nearest_element(src, tgt);
  CHECK_FALSE(op.matching);
  CHECK(op.H.at(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(op.H.at(0, 1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(op.H.at(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(op.H.at(2, 1) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(op.H.at(2, 2) == doctest::Approx(0.2).epsilon(1e-14));

  SUBCASE("projections outside the source clamp to an endpoint") {
    const auto out = build_nearest_element(src, polyline({{-0.3, 0.1}, {1.4, -0.2}}));
    CHECK(out.H.at(0, 0) == 1.0);
    CHECK(out.H.at(1, 2) == 1.0);
    CHECK(out.H.nonzeros() == 2);
  }
  SUBCASE("ties go to the lowest edge index") {
    // Two parallel edges at equal distance from the target point.
    auto two = polyline({{0.0, 0.0}, {1.0, 0.0}, {0.0, 2.0}, {1.0, 2.0}});
    two.edges = {{0, 1}, {2, 3}};
    const auto tgt2 = polyline({{0.2, 1.0}, {0.3, 1.0}});
    auto op2 = build_nearest_element(two, tgt2);
    CHECK(op2.H.at(0, 0) == doctest::Approx(0.8));
    CHECK(op2.H.at(0, 1) == doctest::Approx(0.2));
    CHECK(op2.H.at(0, 2) == 0.0);
    two.edges = {{2, 3}, {0, 1}};
    op2 = build_nearest_element(two, tgt2);
    CHECK(op2.H.at(0, 0) == 0.0);
    CHECK(op2.H.at(0, 2) == doctest::Approx(0.8));
    CHECK(op2.H.at(0, 3) == doctest::Approx(0.2));
  }
}

TEST_CASE("constant fields transfer exactly") {
  const std::pair<InterfaceCurve, InterfaceCurve> pairs[] = {
      {straight(0, 1, 7), straight(0, 1, 10)}, {straight(0, 1, 10), straight(0, 1, 7)}, {graded(13), straight(0, 1, 5)},
      {arc(11), arc(17)}, {arc(17), arc(6)}};
  for (const auto& [s, t] : pairs) {
    for (auto m : {MappingMethod::nearest_element, MappingMethod::mortar}) {
      const auto op = build_mapping(s, t, m);
      CHECK(max_row_sum_error(op.H) <= 1e-12);
      VecField c(s.mesh_size, Vec2{3.7, 3.7});
      const auto out = map_consistent(op, c);
      for (const auto& v : out) {
        CHECK(std::abs(v.x - 3.7) <= 1e-12);
        CHECK(std::abs(v.y - 3.7) <= 1e-12);
      }
    }
  }
}

TEST_CASE("mortar reproduces linear fields on coincident straight lines") {
  const std::pair<InterfaceCurve, InterfaceCurve> pairs[] = {
      {straight(0, 1, 7), straight(0, 1, 10)}, {straight(0, 1, 10), straight(0, 1, 3)}, {graded(9), straight(0, 1, 14)}};
  for (const auto& [s, t] : pairs) {
    const auto op = build_mortar(s, t);
    const auto out = map_consistent(op, field(s, [](const Vec2& p) { return 2.0 * p.x - 0.7; }));
    for (std::size_t i = 0; i < t.points.size(); ++i) {
      const double exact = 2.0 * t.points[i].x - 0.7;
      CHECK(std::abs(out[i].x - exact) <= 1e-10);
      CHECK(std::abs(out[i].y + 2.0 * exact) <= 1e-10);
    }
  }
}

TEST_CASE("nearest element matches pointwise interpolation") {
  const auto s = graded(8);
  const auto t = straight(0, 1, 13);
  std::vector<double> vals;
  for (std::size_t i = 0; i < s.points.size(); ++i) vals.push_back(std::sin(3.0 * i) + 0.1 * i);
  VecField src(s.mesh_size);
  for (std::size_t i = 0; i < vals.size(); ++i) src[i] = {vals[i], 0.0};
  const auto out = map_consistent(build_nearest_element(s, t), src);
  for (std::size_t i = 0; i < t.points.size(); ++i)
    CHECK(std::abs(out[i].x - interpolate_oracle(s, vals, t.points[i].x)) <= 1e-14);
}

TEST_CASE("conservative transfer preserves work and total force") {
  const auto s = arc(11), t = arc(17);
  for (auto m : {MappingMethod::nearest_element, MappingMethod::mortar}) {
    const auto op = build_mapping(s, t, m);
    VecField u(s.mesh_size), f(t.mesh_size);
    for (int i = 0; i < s.mesh_size; ++i) u[i] = {std::cos(1.3 * i), 0.2 * i};
    for (int i = 0; i < t.mesh_size; ++i) f[i] = {std::sin(0.7 * i) - 0.1, 1.0 / (1.0 + i)};
    const auto hu = map_consistent(op, u);
    const auto htf = map_conservative(op, f);
    const double lhs = dot(hu, f), rhs = dot(u, htf);
    CHECK(std::abs(lhs - rhs) <= 1e-14 * (std::abs(lhs) + 1.0) * 10);
    Vec2 fs{}, ft{};
    for (const auto& v : f) ft += v;
    for (const auto& v : htf) fs += v;
    CHECK(norm(fs - ft) <= 1e-12 * (1.0 + norm(ft)));
  }
}

TEST_CASE("identity operator leaves fields unchanged") {
  const auto c = straight(0, 2, 5);
  const auto op = build_mortar(c, c);
  VecField v(c.mesh_size);
  for (int i = 0; i < c.mesh_size; ++i) v[i] = {0.3 * i, -1.0 * i * i};
  CHECK(map_consistent(op, v) == v);
  CHECK(map_conservative(op, v) == v);
}

TEST_CASE("mapping errors") {
  InterfaceCurve empty;
  CHECK_THROWS_AS(build_nearest_element(empty, straight(0, 1, 2)), ValidationError);
  CHECK_THROWS_AS(build_mortar(straight(0, 1, 2), empty), ValidationError);
  const auto op = build_nearest_element(straight(0, 1, 3), straight(0, 1, 4));
  CHECK_THROWS_AS(map_conservative(op, VecField(3)), ValidationError);
  CHECK_THROWS_AS(map_consistent(op, VecField(5)), ValidationError);
  CHECK_THROWS_AS(build_mortar(straight(0, 1, 3), polyline({{0.5, 0.0}, {0.5, 0.0}})), ValidationError);
}

TEST_CASE("interface maps between meshes") {
  const auto fluid = rectangle_mesh(0, 0, 1, 1, 10, 4, {"interface", "outlet", "wall", "inlet"});
  const auto solid = rectangle_mesh(0, -0.5, 1, 0, 7, 2, {"dirichlet", "", "interface", ""});
  VecField us(solid.num_nodes()), ff(fluid.num_nodes());
  for (int i = 0; i < solid.num_nodes(); ++i) us[i] = {0.01 * solid.nodes[i].x, -0.02 * solid.nodes[i].x * solid.nodes[i].x};
  for (int i = 0; i < fluid.num_nodes(); ++i) ff[i] = {std::sin(1.0 + i), 0.5};

  for (auto m : {MappingMethod::nearest_element, MappingMethod::mortar}) {
    const auto cons = build_interface_maps(fluid, solid, m, ForceMode::conservative);
    const auto uf = cons.displacement_to_fluid(us);
    const auto fs = cons.force_to_structure(ff);
    CHECK(uf.size() == fluid.nodes.size());
    CHECK(fs.size() == solid.nodes.size());
    // Off-interface entries stay zero.
    for (int i = 0; i < fluid.num_nodes(); ++i)
      if (fluid.nodes[i].y > 1e-12) CHECK(uf[i] == Vec2{});
    const double ef = dot(uf, ff), es = dot(us, fs);
    CHECK(std::abs(ef - es) <= 1e-12 * std::abs(ef));

    const auto incons = build_interface_maps(fluid, solid, m, ForceMode::consistent);
    CHECK(incons.hf_consistent.H.rows() == 8);
    CHECK(incons.hf_consistent.H.cols() == 11);
    CHECK(max_row_sum_error(incons.hf_consistent.H) <= 1e-12);
    // Transposes agree with the explicit matrices.
    const auto a = incons.hf_transpose(us), b = incons.force_to_structure(ff);
    CHECK(std::abs(dot(a, ff) - dot(us, b)) <= 1e-13);
  }
}
