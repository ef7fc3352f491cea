#pragma once

#include <array>
#include <filesystem>
#include <string>

#include "afsi/coupling.hpp"
#include "afsi/meshkit.hpp"

namespace afsi {

/// Structured rectangle [x0, x1] x [y0, y1] split into 2*nx*ny triangles.
/// Boundary tags are given in the order bottom, right, top, left; an empty
/// tag leaves that side untagged. Node (i, j) has index j*(nx+1) + i.
Mesh2D rectangle_mesh(double x0, double y0, double x1, double y1, int nx, int ny,
                      const std::array<std::string, 4>& tags);

/// Geometry of the beam-in-channel case: a vertical flexible beam clamped to
/// the channel floor, with rounded tip corners.
struct BeamGeometry {
  double channel_length = 6.0;
  double channel_height = 2.0;
  double beam_x = 2.0;
  double beam_length = 1.0;
  double beam_thickness = 0.1;
  double fillet_radius = 0.025;
  /// Interface resolution: edges along each beam side, on each fillet arc and across the top.
  int side_edges = 36;
  int arc_edges = 4;
  int top_edges = 4;
  /// Layers in the body-fitted fluid block around the beam.
  int fluid_layers = 10;
  double layer_width = 0.3;
  /// Side-edge grading ratio between the edge at the tip and the edge at the root.
  double side_grading = 0.5;
  /// Approximate fluid edge length in the far field.
  double far_edge = 0.12;

  int interface_edges() const { return 2 * side_edges + 2 * arc_edges + top_edges; }
  /// Structure elements across the thickness; the tip cap needs one per arc and top edge.
  int structure_across() const { return 2 * arc_edges + top_edges; }
  void validate() const;
  /// Same geometry with the interface resolution scaled by `factor`.
  BeamGeometry refined(double factor) const;
};

struct BeamCase {
  Mesh2D fluid;
  Mesh2D structure;
};

/// Fluid tags: interface, inlet, outlet, wall. Structure tags: interface, dirichlet.
/// The two interface polylines share node positions.
BeamCase make_beam_case(const BeamGeometry& geo = {});

/// Flow and material data of the shipped beam case. Re = 10 on beam length
/// and mean inflow; the sinusoidal inflow peaks at mean * pi / 2.
struct BeamPhysics {
  double density = 10.0;
  double viscosity = 0.45;
  double mean_inflow = 0.45;
  double youngs_modulus = 3e4;
  double poisson_ratio = 0.3;
};

FsiProblem make_beam_problem(const BeamGeometry& geo = {}, const BeamPhysics& phys = {});

}  // namespace afsi
