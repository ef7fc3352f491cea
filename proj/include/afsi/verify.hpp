#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "afsi/coupling.hpp"

namespace afsi {

enum class FdDirection { normal, x, y };

struct FdConfig {
  double step = 1e-5;
  /// Fluid interface node ids; empty selects every default design node.
  std::vector<int> sample_nodes;
  FdDirection direction = FdDirection::normal;

  void validate() const;
};

struct FdSample {
  int node = -1;
  Vec2 point;
  Vec2 direction;
  std::vector<double> values;  // one central difference per functional output
  bool ok = true;
  std::string message;
};

/// Functional of the undeformed geometry, possibly with several outputs.
using ShapeFunctional = std::function<std::vector<double>(const FsiProblem& perturbed)>;

/// `count` default design nodes spread evenly along the interface polyline;
/// every design node when count is 0 or not smaller than the design set.
std::vector<int> spread_design_nodes(const FsiSystem& system, int count);

/// Moves the undeformed fluid interface node by `delta` and the structure
/// interface nodes by H^S-weighted shares of it.
FsiProblem perturbed_problem(const FsiProblem& base, const MappingOperator& hs, int fluid_node, const Vec2& delta);

/// (J(X + eps d) - J(X - eps d)) / (2 eps) per sample node. Samples whose
/// functional throws a numerical error are flagged instead of aborting.
std::vector<FdSample> central_difference(const FsiProblem& base, const FdConfig& fd, const ShapeFunctional& functional);

/// Central differences of each objective set through full FSI re-solves,
/// warm-started from `baseline` when given.
std::vector<FdSample> central_difference_gradient(const FsiProblem& base,
                                                  const std::vector<std::vector<ObjectiveSpec>>& objective_sets,
                                                  const CouplingConfig& coupling, const FdConfig& fd,
                                                  const FsiEquilibrium* baseline = nullptr);

/// |candidate - reference| / |reference|.
double relative_l2_error(const std::vector<double>& candidate, const std::vector<double>& reference);

struct RefinementRow {
  int level = 0;
  double stiffness_scale = 1.0;
  int interface_edges = 0;
  int fluid_nodes = 0;
  double kappa = 0.0;
  std::string objective;
  double value = 0.0;
  /// Relative L2 difference of the normal gradients of the two formulations.
  double formulation_error = 0.0;
  bool ok = true;
  std::string message;
};

struct FormulationPair {
  Formulation reference = Formulation::complete;
  Formulation candidate = Formulation::reduced;
};

/// For each level and each Young's modulus scale: FSI equilibrium, objective
/// values and the gradient difference between two formulations.
std::vector<RefinementRow> refinement_study(const std::vector<FsiProblem>& levels,
                                            const std::vector<double>& stiffness_scales,
                                            const std::vector<ObjectiveSpec>& objectives,
                                            const CouplingConfig& coupling, FormulationPair pair = {});

void write_refinement_csv(const std::filesystem::path& path, const std::vector<RefinementRow>& rows,
                          const std::string& header_comment = "");

}  // namespace afsi
