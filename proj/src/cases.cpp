#include "afsi/cases.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "afsi/errors.hpp"

namespace afsi {

Mesh2D rectangle_mesh(double x0, double y0, double x1, double y1, int nx, int ny,
                      const std::array<std::string, 4>& tags) {
  if (nx < 1 || ny < 1 || !(x1 > x0) || !(y1 > y0)) throw ValidationError("rectangle_mesh: invalid extent or resolution");
  Mesh2D m;
  auto id = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) m.nodes.push_back({x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny});
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  if (!tags[0].empty())
    for (int i = 0; i < nx; ++i) m.boundary.push_back({id(i, 0), id(i + 1, 0), tags[0]});
  if (!tags[1].empty())
    for (int j = 0; j < ny; ++j) m.boundary.push_back({id(nx, j), id(nx, j + 1), tags[1]});
  if (!tags[2].empty())
    for (int i = nx; i > 0; --i) m.boundary.push_back({id(i, ny), id(i - 1, ny), tags[2]});
  if (!tags[3].empty())
    for (int j = ny; j > 0; --j) m.boundary.push_back({id(0, j), id(0, j - 1), tags[3]});
  finalize_mesh(m);
  return m;
}


namespace {

// n + 1 points from a to b whose edge lengths grow geometrically, last/first = ratio.
std::vector<double> geometric_points(double a, double b, int n, double ratio) {
  std::vector<double> pts(n + 1);
  const double q = n > 1 ? std::pow(ratio, 1.0 / (n - 1)) : 1.0;
  double total = 0.0, h = 1.0;
  for (int k = 0; k < n; ++k, h *= q) total += h;
  double s = 0.0;
  h = 1.0;
  pts[0] = a;
  for (int k = 1; k < n; ++k, h *= q) {
    s += h;
    pts[k] = a + (b - a) * s / total;
  }
  pts[n] = b;
  return pts;
}

// Edge count and points between a and b with edge sizes varying linearly from h0 to h1.
std::vector<double> sized_points(double a, double b, double h0, double h1) {
  const double len = std::abs(b - a);
  const int n = std::max(1, static_cast<int>(std::lround(2.0 * len / (h0 + h1))));
  return geometric_points(a, b, n, h1 / h0);
}

using Grid = std::vector<std::vector<Vec2>>;  // grid[j][i]

// Coons patch from four boundary curves; boundary nodes are copied verbatim.
Grid coons(const VecField& bottom, const VecField& top, const VecField& left, const VecField& right) {
  const int ni = static_cast<int>(bottom.size()) - 1, nj = static_cast<int>(left.size()) - 1;
  std::vector<double> s(ni + 1, 0.0), t(nj + 1, 0.0);
  for (int i = 1; i <= ni; ++i) s[i] = s[i - 1] + 0.5 * (norm(bottom[i] - bottom[i - 1]) + norm(top[i] - top[i - 1]));
  for (int j = 1; j <= nj; ++j) t[j] = t[j - 1] + 0.5 * (norm(left[j] - left[j - 1]) + norm(right[j] - right[j - 1]));
  for (auto& v : s) v /= s[ni];
  for (auto& v : t) v /= t[nj];
  Grid g(nj + 1, VecField(ni + 1));
  for (int j = 0; j <= nj; ++j)
    for (int i = 0; i <= ni; ++i) {
      if (j == 0) g[j][i] = bottom[i];
      else if (j == nj) g[j][i] = top[i];
      else if (i == 0) g[j][i] = left[j];
      else if (i == ni) g[j][i] = right[j];
      else
        g[j][i] = (1 - t[j]) * bottom[i] + t[j] * top[i] + (1 - s[i]) * left[j] + s[i] * right[j] -
                  ((1 - s[i]) * (1 - t[j]) * bottom[0] + s[i] * (1 - t[j]) * bottom[ni] + (1 - s[i]) * t[j] * top[0] +
                   s[i] * t[j] * top[ni]);
    }
  return g;
}

double tri_area(const Vec2& a, const Vec2& b, const Vec2& c) { return 0.5 * cross(b - a, c - a); }

// Quality of a counter-clockwise triangle: 4 sqrt(3) area / sum of squared edges (1 for equilateral).
double quality(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double e = dot(b - a, b - a) + dot(c - b, c - b) + dot(a - c, a - c);
  return 4.0 * std::sqrt(3.0) * tri_area(a, b, c) / e;
}

class MeshBuilder {
 public:
  int node(const Vec2& p) {
    auto [it, inserted] = index_.try_emplace({p.x, p.y}, static_cast<int>(mesh_.nodes.size()));
    if (inserted) mesh_.nodes.push_back(p);
    return it->second;
  }

  void triangle(const Vec2& a, const Vec2& b, const Vec2& c) {
    if (tri_area(a, b, c) > 0.0) mesh_.triangles.push_back({node(a), node(b), node(c)});
    else mesh_.triangles.push_back({node(a), node(c), node(b)});
  }

  // Quad split along the diagonal giving the better worst triangle.
  void quad(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double sign = tri_area(a, b, c) + tri_area(a, c, d) > 0 ? 1.0 : -1.0;
    auto q = [&](const Vec2& p, const Vec2& r, const Vec2& s) {
      return sign > 0 ? quality(p, r, s) : quality(p, s, r);
    };
    if (std::min(q(a, b, c), q(a, c, d)) >= std::min(q(a, b, d), q(b, c, d))) {
      triangle(a, b, c);
      triangle(a, c, d);
    } else {
      triangle(a, b, d);
      triangle(b, c, d);
    }
  }

  void grid(const Grid& g) {
    for (std::size_t j = 0; j + 1 < g.size(); ++j)
      for (std::size_t i = 0; i + 1 < g[j].size(); ++i) quad(g[j][i], g[j][i + 1], g[j + 1][i + 1], g[j + 1][i]);
  }

  template <class Classify>
  Mesh2D finish(Classify classify) {
    std::map<std::pair<int, int>, int> count;
    for (const auto& t : mesh_.triangles)
      for (int k = 0; k < 3; ++k) ++count[{std::min(t[k], t[(k + 1) % 3]), std::max(t[k], t[(k + 1) % 3])}];
    for (const auto& [e, n] : count)
      if (n == 1) mesh_.boundary.push_back({e.first, e.second, classify(mesh_.nodes[e.first], mesh_.nodes[e.second])});
    finalize_mesh(mesh_);
    return std::move(mesh_);
  }

 private:
  Mesh2D mesh_;
  std::map<std::pair<double, double>, int> index_;
};

}  // namespace

void BeamGeometry::validate() const {
  if (!(channel_length > 0 && channel_height > 0 && beam_length > 0 && beam_thickness > 0))
    throw ValidationError("beam geometry: lengths must be positive");
  if (!(fillet_radius > 0 && 2 * fillet_radius < beam_thickness && fillet_radius < beam_length))
    throw ValidationError("beam geometry: fillet radius must be below half the thickness");
  if (side_edges < 2 || arc_edges < 1 || top_edges < 1 || fluid_layers < 1)
    throw ValidationError("beam geometry: resolution too coarse");
  if (!(layer_width > 0 && far_edge > 0 && side_grading > 0))
    throw ValidationError("beam geometry: layer width, far edge and grading must be positive");
  const double half = 0.5 * beam_thickness + layer_width;
  if (beam_x - half <= 0 || beam_x + half >= channel_length || beam_length + layer_width >= channel_height)
    throw ValidationError("beam geometry: layer block does not fit into the channel");
}

BeamGeometry BeamGeometry::refined(double factor) const {
  if (!(factor > 0)) throw ValidationError("refinement factor must be positive");
  auto scale = [&](int n) { return std::max(1, static_cast<int>(std::lround(n * factor))); };
  BeamGeometry g = *this;
  g.side_edges = scale(side_edges);
  g.arc_edges = scale(arc_edges);
  g.top_edges = scale(top_edges);
  g.fluid_layers = scale(fluid_layers);
  g.far_edge = far_edge / factor;
  return g;
}

BeamCase make_beam_case(const BeamGeometry& geo) {
  geo.validate();
  const double xl = geo.beam_x - 0.5 * geo.beam_thickness, xr = geo.beam_x + 0.5 * geo.beam_thickness;
  const double r = geo.fillet_radius, yf = geo.beam_length - r, H = geo.channel_height, L = geo.channel_length;
  const int S = geo.side_edges, A = geo.arc_edges, T = geo.top_edges, C = geo.structure_across();

  // Interface polyline from the left root over the tip to the right root, with outward (fluid-side) normals.
  const auto ys = geometric_points(0.0, yf, S, geo.side_grading);
  VecField iface, normal;
  for (int k = 0; k <= S; ++k) {
    iface.push_back({xl, ys[k]});
    normal.push_back({-1.0, 0.0});
  }
  const Vec2 cl{xl + r, yf}, cr{xr - r, yf};
  for (int m = 1; m < A; ++m) {
    const double th = std::numbers::pi * (1.0 - 0.5 * m / A);
    normal.push_back({std::cos(th), std::sin(th)});
    iface.push_back(cl + r * normal.back());
  }
  for (int m = 0; m <= T; ++m) {
    iface.push_back({cl.x + (cr.x - cl.x) * m / T, geo.beam_length});
    normal.push_back({0.0, 1.0});
  }
  for (int m = 1; m < A; ++m) {
    const double th = 0.5 * std::numbers::pi * (1.0 - static_cast<double>(m) / A);
    normal.push_back({std::cos(th), std::sin(th)});
    iface.push_back(cr + r * normal.back());
  }
  for (int k = S; k >= 0; --k) {
    iface.push_back({xr, ys[k]});
    normal.push_back({1.0, 0.0});
  }
  const int NI = static_cast<int>(iface.size()) - 1;

  // Body-fitted layers.
  const auto d = geometric_points(0.0, geo.layer_width, geo.fluid_layers, std::pow(1.2, geo.fluid_layers - 1));
  // Over the tip the outermost layer is spread uniformly in arc length; inner layers blend towards it.
  const double W = geo.layer_width, R = r + W, top_len = cr.x - cl.x, total = std::numbers::pi * R + top_len;
  VecField shift(NI + 1);
  for (int i = S + 1; i < NI - S; ++i) {
    const double sa = total * (i - S) / (NI - 2 * S);
    Vec2 q;
    if (sa < 0.5 * std::numbers::pi * R) {
      const double th = std::numbers::pi - sa / R;
      q = cl + R * Vec2{std::cos(th), std::sin(th)};
    } else if (sa < 0.5 * std::numbers::pi * R + top_len) {
      q = {cl.x + sa - 0.5 * std::numbers::pi * R, yf + R};
    } else {
      const double th = 0.5 * std::numbers::pi - (sa - 0.5 * std::numbers::pi * R - top_len) / R;
      q = cr + R * Vec2{std::cos(th), std::sin(th)};
    }
    shift[i] = q - (iface[i] + W * normal[i]);
  }
  Grid layers(d.size(), VecField(NI + 1));
  for (std::size_t k = 0; k < d.size(); ++k)
    for (int i = 0; i <= NI; ++i)
      layers[k][i] = k == 0 ? iface[i] : iface[i] + d[k] * normal[i] + (d[k] / W) * shift[i];
  const VecField& outer = layers.back();
  const double h_near = d.back() - d[d.size() - 2];

  // Rows shared by the far-field blocks: beam side rows, then rows above the layer block.
  auto ya = sized_points(yf, H, ys[S] - ys[S - 1], geo.far_edge);
  std::vector<double> rows(ys.begin(), ys.end());
  rows.insert(rows.end(), ya.begin() + 1, ya.end());

  // The block above the layers widens towards the top wall so that its lower corners are not tangent to the arcs.
  const double xo_l = outer[0].x, xo_r = outer[NI].x, slant = 0.5 * (H - yf);
  const double xt_l = xo_l - slant, xt_r = xo_r + slant;
  auto xs_l = sized_points(0.0, xo_l, geo.far_edge, h_near);
  auto xs_r = sized_points(xo_r, L, h_near, geo.far_edge);
  VecField lb, lt, li, lr, rb, rt, ro, rl;
  for (std::size_t i = 0; i < xs_l.size(); ++i) {
    lb.push_back({xs_l[i], 0.0});
    lt.push_back({i + 1 == xs_l.size() ? xt_l : xs_l[i] * xt_l / xo_l, H});
  }
  for (std::size_t i = 0; i < xs_r.size(); ++i) {
    rb.push_back({xs_r[i], 0.0});
    rt.push_back({i == 0 ? xt_r : L - (L - xs_r[i]) * (L - xt_r) / (L - xo_r), H});
  }
  lb.back() = outer[0];
  rb.front() = outer[NI];
  for (std::size_t j = 0; j < rows.size(); ++j) {
    li.push_back({0.0, rows[j]});
    ro.push_back({L, rows[j]});
    if (j <= static_cast<std::size_t>(S)) {
      lr.push_back(outer[j]);
      rl.push_back(outer[NI - j]);
    } else {
      const double f = j + 1 == rows.size() ? 1.0 : (rows[j] - yf) / (H - yf);
      lr.push_back({j + 1 == rows.size() ? xt_l : xo_l - slant * f, rows[j]});
      rl.push_back({j + 1 == rows.size() ? xt_r : xo_r + slant * f, rows[j]});
    }
  }
  const Grid left = coons(lb, lt, li, lr);
  const Grid right = coons(rb, rt, rl, ro);

  VecField bottom(outer.begin() + S, outer.begin() + (NI - S) + 1), top;
  std::vector<double> arc{0.0};
  for (std::size_t i = 1; i < bottom.size(); ++i) arc.push_back(arc.back() + norm(bottom[i] - bottom[i - 1]));
  for (std::size_t i = 0; i < bottom.size(); ++i) top.push_back({xt_l + (xt_r - xt_l) * arc[i] / arc.back(), H});
  top.front().x = xt_l;
  top.back().x = xt_r;
  const VecField lside(lr.begin() + S, lr.end()), rside(rl.begin() + S, rl.end());
  const Grid above = coons(bottom, top, lside, rside);

  MeshBuilder fb;
  fb.grid(layers);
  fb.grid(left);
  fb.grid(right);
  fb.grid(above);
  BeamCase out;
  out.fluid = fb.finish([&](const Vec2& a, const Vec2& b) -> std::string {
    if (a.x == 0.0 && b.x == 0.0) return "inlet";
    if (a.x == L && b.x == L) return "outlet";
    if ((a.y == 0.0 && b.y == 0.0) || (a.y == H && b.y == H)) return "wall";
    return "interface";
  });

  // Structure: columns across the thickness up to the fillet start, then a cap strip under the tip curve.
  MeshBuilder sb;
  Grid body(S + 1, VecField(C + 1));
  for (int k = 0; k <= S; ++k)
    for (int i = 0; i <= C; ++i) {
      const double x = i == 0 ? xl : i == C ? xr : xl + (xr - xl) * i / C;
      body[k][i] = {x, ys[k]};
    }
  sb.grid(body);
  const VecField& base = body[S];
  const VecField cap(iface.begin() + S, iface.begin() + S + C + 1);
  sb.triangle(base[0], base[1], cap[1]);
  for (int i = 1; i < C - 1; ++i) sb.quad(base[i], base[i + 1], cap[i + 1], cap[i]);
  sb.triangle(base[C - 1], base[C], cap[C - 1]);
  out.structure = sb.finish([](const Vec2& a, const Vec2& b) -> std::string {
    return a.y == 0.0 && b.y == 0.0 ? "dirichlet" : "interface";
  });
  return out;
}

FsiProblem make_beam_problem(const BeamGeometry& geo, const BeamPhysics& phys) {
  auto c = make_beam_case(geo);
  FsiProblem p;
  p.fluid_mesh = std::move(c.fluid);
  p.structure_mesh = std::move(c.structure);
  p.flow = {phys.density, phys.viscosity, false};
  p.fluid_bc.inflow = {phys.mean_inflow * std::numbers::pi / 2.0, 0.0, geo.channel_height};
  p.material = {phys.youngs_modulus, phys.poisson_ratio, 1.0};
  p.characteristic_length = geo.beam_length;
  return p;
}

}  // namespace afsi
