#pragma once

#include "afsi/cases.hpp"
#include "afsi/coupling.hpp"

// Channel over a flexible floor plate clamped at both ends. The plate is
// loaded by the channel pressure and the wall shear of the flow above it.
inline afsi::FsiProblem flexible_floor(int nx = 12, int ny = 3, int plate_nx = 12, double youngs = 1000.0) {
  afsi::FsiProblem p;
  p.fluid_mesh = afsi::rectangle_mesh(0, 0, 3, 0.5, nx, ny, {"interface", "outlet", "wall", "inlet"});
  p.structure_mesh = afsi::rectangle_mesh(0, -0.1, 3, 0, plate_nx, 2, {"", "dirichlet", "interface", "dirichlet"});
  p.flow = {1.0, 0.1, false};
  p.fluid_bc.inflow = {1.0, 0.0, 0.5};
  p.material = {youngs, 0.3, 1.0};
  p.characteristic_length = 3.0;
  return p;
}
