#pragma once

#include <optional>
#include <vector>

#include "vpem/scenario.hpp"

namespace vpem {

struct Prior {
  enum class Kind { PointMass, Uniform };
  Kind kind = Kind::PointMass;
  double delta0 = 0.0;            // PointMass
  double delta1 = 0.0, delta2 = 0.0;  // Uniform on [delta1, delta2]
};

struct ReferenceSearch {
  double lo = 0.0;
  double hi = 1.0;
  int grid_points = 129;
  int refine_iters = 80;
  Prior prior;
  int delta_nodes = 41;  // Gauss-Legendre nodes for the Uniform prior

  void validate() const;
  /// Default domains: one monotone branch of the response.
  static ReferenceSearch for_noon(int n);
  static ReferenceSearch for_coherent_squeezed();
};

/// Squared zeroth-order bias [(x(phi0) - x_id(phi0)) / y_id(phi0)]^2;
/// nullopt where |y_id| <= 1e-6 (the objective is undefined there).
std::optional<double> zeroth_order_objective(const ScenarioEngine& engine, double phi0,
                                             double delta, int n);

/// arg min over phi0 of the point-mass objective at delta0: coarse grid scan
/// then golden-section refinement; ties break toward the smallest |phi0|.
double optimal_reference(const ScenarioEngine& engine, double delta0, int n,
                         const ReferenceSearch& search);

/// arg min of the objective averaged over the Uniform(delta1, delta2) prior.
double averaged_optimal_reference(const ScenarioEngine& engine, int n,
                                  const ReferenceSearch& search);

struct ContourSurface {
  std::vector<double> phi0_grid;
  std::vector<double> delta_grid;
  RealMatrix values;  // rows: delta, cols: phi0; NaN = masked (degenerate y_id)
};

ContourSurface contour_surface(const ScenarioEngine& engine, std::vector<double> phi0_grid,
                               std::vector<double> delta_grid, int n);

}  // namespace vpem
