#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "vpem/scenario.hpp"

namespace vpem {

/// Local linearization x + y*phi of an expectation response around phi0.
struct Linearization {
  double x = 0.0;
  double y = 0.0;
  double phi0 = 0.0;
  double step = 1e-4;
};

/// Central difference with one Richardson step; throws NumericalError if the
/// derivative is not reproduced within 1e-6 when the step is halved.
Linearization linearize(const std::function<double(double)>& response, double phi0,
                        double step = 1e-4);

enum class EstimatorKind { Ideal, Error, Mitigated };

/// phi_est = (mean_outcome - x_id) / y_id. The ideal coefficients are always
/// used; the unknown noise is exactly what the estimator cannot see.
double estimate(EstimatorKind kind, double mean_outcome, const Linearization& lin_id);

struct BiasReport {
  double phi = 0.0;
  double phi0 = 0.0;
  double delta = 0.0;
  int n = 1;  // 1 = unmitigated
  double bias = 0.0;             // exact <phi_est> - phi
  double bias_linearized = 0.0;  // (x - x_id + phi (y - y_id)) / y_id
  double bias_sq = 0.0;
  double statistical_term = 0.0;
  double mse = 0.0;  // bias_sq + statistical_term
  double exact_expectation = 0.0;
  double lambda_dominant = 1.0;
  std::optional<double> sampled_estimate;
};

/// Bias from exact expectations (no O(phi^2) truncation), plus the
/// linearized form for comparison. n = 1 uses the raw noisy expectation,
/// n >= 2 the circuit ratio.
BiasReport bias_exact(const ScenarioEngine& engine, double phi, double phi0, double delta, int n);

/// Adds the statistical term of the respective MSE formula. For the
/// mitigated case each circuit runs N_s / (2n) times.
BiasReport mse(EstimatorKind kind, const ScenarioEngine& engine, double phi, double phi0,
               double delta, int n, long long n_samples);

struct SeriesCoefficients {
  double phi0 = 0.0;
  double y_id = 0.0;
  RealVector lambda_k;  // k = 1..max_order; lambda = 1 - sum lambda_k delta^k
  RealVector a_k;       // k = 1..max_order
  RealVector b_k;       // k = 0..max_order (b0 first)
  RealVector f_k;       // k = 1..max_order
  RealVector da_k;      // d a_k / d phi0
  RealVector df_k;      // d f_k / d phi0
  double fit_residual = 0.0;
};

/// Extracts the noise-strength expansions of the dominant eigenvalue, the
/// dominant-eigenvector expectation and the tail expectation by polynomial
/// least squares over delta_grid, and assembles f_k.
SeriesCoefficients series_coefficients(const ScenarioEngine& engine, double phi0, int max_order,
                                       const std::vector<double>& delta_grid);

struct LeadingOrder {
  int order = 0;  // INT_MAX when every coefficient is below resolution
  double coefficient = 0.0;
  bool coefficient_known = false;
};

/// First power of delta with a non-negligible coefficient in the linearized
/// bias; n is the mitigation order bounding how far the a-series governs.
LeadingOrder bias_leading_order(const SeriesCoefficients& series, bool mitigated, double phi,
                                int n);

}  // namespace vpem
