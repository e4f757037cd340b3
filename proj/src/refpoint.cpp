#include "vpem/refpoint.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "vpem/parallel.hpp"
#include "vpem/quadrature.hpp"

namespace vpem {

void ReferenceSearch::validate() const {
  if (!(lo < hi)) throw ConfigError("ReferenceSearch: empty domain");
  if (grid_points < 16) throw ConfigError("ReferenceSearch: grid_points must be >= 16");
  if (prior.kind == Prior::Kind::Uniform && !(prior.delta1 < prior.delta2))
    throw ConfigError("ReferenceSearch: Uniform prior needs delta1 < delta2");
  if (delta_nodes < 21) throw ConfigError("ReferenceSearch: need >= 21 quadrature nodes");
}

ReferenceSearch ReferenceSearch::for_noon(int n) {
  ReferenceSearch s;
  s.lo = -std::numbers::pi / (2.0 * n);
  s.hi = std::numbers::pi / (2.0 * n);
  return s;
}

ReferenceSearch ReferenceSearch::for_coherent_squeezed() {
  ReferenceSearch s;
  s.lo = 0.0;
  s.hi = std::numbers::pi / 2.0;
  return s;
}

namespace {

constexpr double kSensitivityFloor = 1e-6;
constexpr double kRefineTol = 1e-8;

double objective_at(const ScenarioEngine& engine, const NoisyResponses& resp, double phi0,
                    int n) {
  const double y_id = engine.ideal().derivative(phi0);
  if (std::abs(y_id) <= kSensitivityFloor) return std::numeric_limits<double>::quiet_NaN();
  const double diff = resp.order(n).x(phi0) - engine.ideal().eval(phi0);
  const double ratio = diff / y_id;
  return ratio * ratio;
}

/// Grid scan + golden-section refinement of a possibly-masked objective.
double minimize(const std::function<double(double)>& objective, const ReferenceSearch& search) {
  const int points = search.grid_points;
  std::vector<double> grid(points), value(points);
  for (int i = 0; i < points; ++i) {
    grid[i] = search.lo + (search.hi - search.lo) * i / (points - 1);
    value[i] = objective(grid[i]);
  }
  int best = -1;
  for (int i = 0; i < points; ++i) {
    if (std::isnan(value[i])) continue;
    if (best < 0 || value[i] < value[best] ||
        (value[i] == value[best] && std::abs(grid[i]) < std::abs(grid[best])))
      best = i;
  }
  if (best < 0) throw SearchError("reference search: every grid point is masked");
  if (value[best] < 1e-30) return grid[best];  // exact zero; nothing to refine

  double a = grid[std::max(0, best - 1)];
  double b = grid[std::min(points - 1, best + 1)];
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  const auto masked_inf = [&](double x) {
    const double v = objective(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = masked_inf(c), fd = masked_inf(d);
  for (int it = 0; it < search.refine_iters && (b - a) > 1e-12; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = masked_inf(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = masked_inf(d);
    }
  }
  const double refined = 0.5 * (a + b);
  const double f_refined = masked_inf(refined);
  // minimizer certificate: never worse than the scanned grid
  if (f_refined > value[best] + kRefineTol) return grid[best];
  return refined;
}

}  // namespace

std::optional<double> zeroth_order_objective(const ScenarioEngine& engine, double phi0,
                                             double delta, int n) {
  const auto resp = engine.responses(delta, n);
  const double v = objective_at(engine, *resp, phi0, n);
  if (std::isnan(v)) return std::nullopt;
  return v;
}

double optimal_reference(const ScenarioEngine& engine, double delta0, int n,
                         const ReferenceSearch& search) {
  search.validate();
  if (search.prior.kind != Prior::Kind::PointMass)
    throw ConfigError("optimal_reference: requires a point-mass prior");
  const auto resp = engine.responses(delta0, n);
  return minimize([&](double phi0) { return objective_at(engine, *resp, phi0, n); }, search);
}

double averaged_optimal_reference(const ScenarioEngine& engine, int n,
                                  const ReferenceSearch& search) {
  search.validate();
  if (search.prior.kind != Prior::Kind::Uniform)
    throw ConfigError("averaged_optimal_reference: requires a uniform prior");
  const auto rule =
      quadrature::gauss_legendre(search.delta_nodes, search.prior.delta1, search.prior.delta2);
  engine.prepare(std::span<const double>(rule.nodes.data(), rule.nodes.size()), n);
  std::vector<std::shared_ptr<const NoisyResponses>> resp;
  resp.reserve(rule.nodes.size());
  for (double delta : rule.nodes) resp.push_back(engine.responses(delta, n));
  const double weight_norm = search.prior.delta2 - search.prior.delta1;  // uniform density
  return minimize(
      [&](double phi0) {
        double acc = 0.0;
        for (int q = 0; q < rule.size(); ++q) {
          const double v = objective_at(engine, *resp[q], phi0, n);
          if (std::isnan(v)) return std::numeric_limits<double>::quiet_NaN();
          acc += rule.weights[q] * v;
        }
        return acc / weight_norm;
      },
      search);
}

ContourSurface contour_surface(const ScenarioEngine& engine, std::vector<double> phi0_grid,
                               std::vector<double> delta_grid, int n) {
  engine.prepare(std::span<const double>(delta_grid.data(), delta_grid.size()), n);
  ContourSurface surface;
  surface.values.resize(static_cast<Eigen::Index>(delta_grid.size()),
                        static_cast<Eigen::Index>(phi0_grid.size()));
  for (std::size_t row = 0; row < delta_grid.size(); ++row) {
    const auto resp = engine.responses(delta_grid[row], n);
    for (std::size_t col = 0; col < phi0_grid.size(); ++col)
      surface.values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) =
          objective_at(engine, *resp, phi0_grid[col], n);
  }
  surface.phi0_grid = std::move(phi0_grid);
  surface.delta_grid = std::move(delta_grid);
  return surface;
}

}  // namespace vpem
