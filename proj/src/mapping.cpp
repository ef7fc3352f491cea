#include "afsi/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "afsi/errors.hpp"

namespace afsi {

InterfaceCurve interface_curve(const Mesh2D& mesh, const std::string& tag) {
  InterfaceCurve c;
  c.tag = tag;
  c.mesh_size = mesh.num_nodes();
  c.nodes = mesh.nodes_with_tag(tag);
  if (c.nodes.empty()) throw InputError("mapping: mesh has no boundary tagged '" + tag + "'");
  std::map<int, int> local;
  for (std::size_t i = 0; i < c.nodes.size(); ++i) {
    local[c.nodes[i]] = static_cast<int>(i);
    c.points.push_back(mesh.nodes[c.nodes[i]]);
  }
  for (int e : mesh.edges_with_tag(tag)) c.edges.push_back({local[mesh.boundary[e].a], local[mesh.boundary[e].b]});
  return c;
}

namespace {

struct Projection {
  int edge = -1;
  double t = 0.0;  // parameter along the edge, 0 at its first node
};

Projection project(const InterfaceCurve& c, const Vec2& p) {
  Projection best;
  double best_d = std::numeric_limits<double>::infinity();
  for (int e = 0; e < static_cast<int>(c.edges.size()); ++e) {
    const Vec2 a = c.points[c.edges[e][0]], b = c.points[c.edges[e][1]];
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double d = norm(p - (a + t * ab));
    // Strict comparison with a round-off margin keeps the lowest edge index on ties.
    if (best.edge < 0 || d < best_d - 1e-14 * (1.0 + best_d)) {
      best_d = d;
      best = {e, t};
    }
  }
  return best;
}

double bbox_diagonal(const InterfaceCurve& a, const InterfaceCurve& b) {
  Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Vec2 hi = -lo;
  for (const auto* c : {&a, &b})
    for (const auto& p : c->points) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
  return norm(hi - lo);
}

// Node-to-node correspondence when both curves share every node position.
bool matching_permutation(const InterfaceCurve& s, const InterfaceCurve& t, std::vector<int>& perm) {
  if (s.points.size() != t.points.size()) return false;
  const double tol = 1e-12 * std::max(bbox_diagonal(s, t), 1e-300);
  perm.assign(t.points.size(), -1);
  std::vector<bool> used(s.points.size(), false);
  for (std::size_t i = 0; i < t.points.size(); ++i) {
    for (std::size_t j = 0; j < s.points.size(); ++j) {
      if (!used[j] && norm(t.points[i] - s.points[j]) <= tol) {
        perm[i] = static_cast<int>(j);
        used[j] = true;
        break;
      }
    }
    if (perm[i] < 0) return false;
  }
  return true;
}

MappingOperator skeleton(const InterfaceCurve& source, const InterfaceCurve& target, MappingMethod method) {
  if (source.points.empty() || target.points.empty() || source.edges.empty() || target.edges.empty())
    throw ValidationError("mapping: empty source or target interface");
  MappingOperator op;
  op.source_tag = source.tag;
  op.target_tag = target.tag;
  op.source_nodes = source.nodes;
  op.target_nodes = target.nodes;
  op.source_points = source.points;
  op.target_points = target.points;
  op.source_mesh_size = source.mesh_size;
  op.target_mesh_size = target.mesh_size;
  op.method = method;
  return op;
}

bool try_matching(const InterfaceCurve& source, const InterfaceCurve& target, MappingOperator& op) {
  std::vector<int> perm;
  if (!matching_permutation(source, target, perm)) return false;
  std::vector<Triplet> trip;
  for (std::size_t i = 0; i < perm.size(); ++i) trip.push_back({static_cast<int>(i), perm[i], 1.0});
  op.H = SparseMatrix::assemble(trip, static_cast<int>(target.points.size()), static_cast<int>(source.points.size()));
  op.matching = true;
  return true;
}

void add_shape_weights(const InterfaceCurve& c, const Projection& pr, int row, double scale, std::vector<Triplet>& trip) {
  const auto& e = c.edges[pr.edge];
  if (pr.t < 1.0) trip.push_back({row, e[0], scale * (1.0 - pr.t)});
  if (pr.t > 0.0) trip.push_back({row, e[1], scale * pr.t});
}

}  // namespace

MappingOperator build_nearest_element(const InterfaceCurve& source, const InterfaceCurve& target) {
  MappingOperator op = skeleton(source, target, MappingMethod::nearest_element);
  if (try_matching(source, target, op)) return op;
  std::vector<Triplet> trip;
  for (std::size_t i = 0; i < target.points.size(); ++i)
    add_shape_weights(source, project(source, target.points[i]), static_cast<int>(i), 1.0, trip);
  op.H = SparseMatrix::assemble(trip, static_cast<int>(target.points.size()), static_cast<int>(source.points.size()));
  return op;
}

MappingOperator build_mortar(const InterfaceCurve& source, const InterfaceCurve& target) {
  MappingOperator op = skeleton(source, target, MappingMethod::mortar);
  if (try_matching(source, target, op)) return op;
  const int nt = static_cast<int>(target.points.size()), ns = static_cast<int>(source.points.size());
  static const double gx[3] = {0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
  static const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  std::vector<Triplet> mtt, mts;
  for (const auto& te : target.edges) {
    const Vec2 a = target.points[te[0]], b = target.points[te[1]];
    const Vec2 ab = b - a;
    const double len = norm(ab);
    if (!(len > 0.0)) throw ValidationError("mapping: degenerate target edge");
    mtt.push_back({te[0], te[0], len / 3.0});
    mtt.push_back({te[1], te[1], len / 3.0});
    mtt.push_back({te[0], te[1], len / 6.0});
    mtt.push_back({te[1], te[0], len / 6.0});
    // Split at the projections of source nodes so that each piece sees one source edge.
    std::vector<double> cuts{0.0, 1.0};
    for (const auto& p : source.points) {
      const double t = dot(p - a, ab) / (len * len);
      if (t > 1e-12 && t < 1.0 - 1e-12) cuts.push_back(t);
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double t0 = cuts[k], t1 = cuts[k + 1];
      if (t1 - t0 <= 1e-14) continue;
      for (int g = 0; g < 3; ++g) {
        const double t = t0 + (t1 - t0) * gx[g];
        const double wgt = gw[g] * (t1 - t0) * len;
        const Projection pr = project(source, a + t * ab);
        std::vector<Triplet> local;
        add_shape_weights(source, pr, 0, 1.0, local);
        for (const auto& l : local) {
          mts.push_back({te[0], l.col, wgt * (1.0 - t) * l.value});
          mts.push_back({te[1], l.col, wgt * t * l.value});
        }
      }
    }
  }
  const SparseMatrix Mtt = SparseMatrix::assemble(mtt, nt, nt);
  const SparseMatrix Mts = SparseMatrix::assemble(mts, nt, ns);
  const LuSolver lu(Mtt);
  std::vector<Triplet> h;
  std::vector<double> col(nt);
  for (int j = 0; j < ns; ++j) {
    std::fill(col.begin(), col.end(), 0.0);
    for (int i = 0; i < nt; ++i) col[i] = Mts.at(i, j);
    if (norm2(col) == 0.0) continue;
    auto x = lu.solve(col);
    for (int i = 0; i < nt; ++i)
      if (x[i] != 0.0) h.push_back({i, j, x[i]});
  }
  op.H = SparseMatrix::assemble(h, nt, ns);
  return op;
}

MappingOperator build_mapping(const InterfaceCurve& source, const InterfaceCurve& target, MappingMethod method) {
  return method == MappingMethod::mortar ? build_mortar(source, target) : build_nearest_element(source, target);
}

VecField map_consistent(const MappingOperator& op, const VecField& source) {
  if (static_cast<int>(source.size()) != op.source_mesh_size)
    throw ValidationError("mapping: source field size does not match the source mesh");
  VecField out(op.target_mesh_size);
  for (int c = 0; c < 2; ++c) {
    std::vector<double> s(op.source_nodes.size());
    for (std::size_t j = 0; j < s.size(); ++j) s[j] = source[op.source_nodes[j]][c];
    auto t = op.H.apply(s);
    for (std::size_t i = 0; i < t.size(); ++i) out[op.target_nodes[i]][c] = t[i];
  }
  return out;
}

VecField map_conservative(const MappingOperator& op, const VecField& target) {
  if (static_cast<int>(target.size()) != op.target_mesh_size)
    throw ValidationError("mapping: target field size does not match the target mesh");
  VecField out(op.source_mesh_size);
  for (int c = 0; c < 2; ++c) {
    std::vector<double> t(op.target_nodes.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = target[op.target_nodes[i]][c];
    auto s = op.H.apply_transpose(t);
    for (std::size_t j = 0; j < s.size(); ++j) out[op.source_nodes[j]][c] = s[j];
  }
  return out;
}

VecField InterfaceMaps::displacement_to_fluid(const VecField& u_structure) const {
  return map_consistent(hs, u_structure);
}

VecField InterfaceMaps::force_to_structure(const VecField& f_fluid) const {
  return force_mode == ForceMode::conservative ? map_conservative(hs, f_fluid) : map_consistent(hf_consistent, f_fluid);
}

VecField InterfaceMaps::hs_transpose(const VecField& fluid_field) const { return map_conservative(hs, fluid_field); }

VecField InterfaceMaps::hf_transpose(const VecField& structure_field) const {
  return force_mode == ForceMode::conservative ? map_consistent(hs, structure_field)
                                               : map_conservative(hf_consistent, structure_field);
}

InterfaceMaps build_interface_maps(const Mesh2D& fluid, const Mesh2D& structure, MappingMethod method, ForceMode mode,
                                   const std::string& tag) {
  const auto cf = interface_curve(fluid, tag);
  const auto cs = interface_curve(structure, tag);
  InterfaceMaps maps;
  maps.force_mode = mode;
  maps.hs = build_mapping(cs, cf, method);
  if (mode == ForceMode::consistent) maps.hf_consistent = build_mapping(cf, cs, method);
  return maps;
}

}  // namespace afsi
