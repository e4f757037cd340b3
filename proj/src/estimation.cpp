#include "vpem/estimation.hpp"

#include <climits>
#include <cmath>
#include <sstream>

namespace vpem {

Linearization linearize(const std::function<double(double)>& response, double phi0,
                        double step) {
  if (step < 1e-6 || step > 1e-2)
    throw ConfigError("linearize: step must lie in [1e-6, 1e-2]");
  const auto central = [&](double h) {
    return (response(phi0 + h) - response(phi0 - h)) / (2.0 * h);
  };
  const auto richardson = [&](double h) {
    return (4.0 * central(0.5 * h) - central(h)) / 3.0;
  };
  const double y_full = richardson(step);
  const double y_half = richardson(0.5 * step);
  if (std::abs(y_full - y_half) > 1e-6)
    throw NumericalError("linearize: derivative not reproduced when the step is halved");
  Linearization lin;
  lin.x = response(phi0);
  lin.y = y_half;
  lin.phi0 = phi0;
  lin.step = step;
  return lin;
}

double estimate(EstimatorKind, double mean_outcome, const Linearization& lin_id) {
  if (std::abs(lin_id.y) <= 1e-6)
    throw NumericalError("estimate: degenerate sensitivity |y_id| <= 1e-6");
  return (mean_outcome - lin_id.x) / lin_id.y;
}

namespace {

Linearization linearize_response(const PhaseResponse& response, double phi0) {
  return linearize([&](double t) { return response.eval(t); }, phi0);
}

}  // namespace

BiasReport bias_exact(const ScenarioEngine& engine, double phi, double phi0, double delta,
                      int n) {
  if (n < 1) throw ConfigError("bias_exact: order must be >= 1");
  const auto resp = engine.responses(delta, n);
  const auto& ord = resp->order(n);
  const Linearization lin_id = linearize_response(engine.ideal(), phi0);
  const double theta = phi0 + phi;

  BiasReport report;
  report.phi = phi;
  report.phi0 = phi0;
  report.delta = delta;
  report.n = n;
  report.lambda_dominant = resp->lambda;
  report.exact_expectation = ord.x(theta);
  report.bias = estimate(n == 1 ? EstimatorKind::Error : EstimatorKind::Mitigated,
                         report.exact_expectation, lin_id) -
                phi;
  const Linearization lin_n = linearize([&](double t) { return ord.x(t); }, phi0);
  report.bias_linearized =
      (lin_n.x - lin_id.x + phi * (lin_n.y - lin_id.y)) / lin_id.y;
  report.bias_sq = report.bias * report.bias;
  report.statistical_term = 0.0;
  report.mse = report.bias_sq;
  return report;
}

BiasReport mse(EstimatorKind kind, const ScenarioEngine& engine, double phi, double phi0,
               double delta, int n, long long n_samples) {
  if (n_samples < 1) throw ConfigError("mse: n_samples must be >= 1");
  const double theta = phi0 + phi;
  const Linearization lin_id = linearize_response(engine.ideal(), phi0);
  const double y2 = lin_id.y * lin_id.y;

  BiasReport report;
  switch (kind) {
    case EstimatorKind::Ideal: {
      report.phi = phi;
      report.phi0 = phi0;
      report.delta = 0.0;
      report.n = 1;
      const double x = engine.ideal().eval(theta);
      report.exact_expectation = x;
      report.bias = estimate(kind, x, lin_id) - phi;
      report.bias_linearized = 0.0;
      // parity is involutory: Tr[A^2 rho] = Tr[rho]
      const double variance = engine.ideal_trace() - x * x;
      report.statistical_term = variance / (y2 * static_cast<double>(n_samples));
      break;
    }
    case EstimatorKind::Error: {
      report = bias_exact(engine, phi, phi0, delta, 1);
      const auto resp = engine.responses(delta, 1);
      const double x = report.exact_expectation;
      const double variance = resp->trace - x * x;
      report.statistical_term = variance / (y2 * static_cast<double>(n_samples));
      break;
    }
    case EstimatorKind::Mitigated: {
      const long long per_circuit = n_samples / (2 * n);
      if (per_circuit < 1)
        throw ConfigError("mse: sample budget below one shot per mitigation circuit");
      report = bias_exact(engine, phi, phi0, delta, n);
      const auto resp = engine.responses(delta, n);
      const auto& ord = resp->order(n);
      const double za = ord.z_a.eval(theta);
      const double zi = ord.z_i;
      const double zi2 = zi * zi;
      const double bracket =
          (1.0 - za * za) / zi2 + za * za * (1.0 - zi2) / (zi2 * zi2);
      report.statistical_term = bracket / (static_cast<double>(per_circuit) * y2);
      break;
    }
  }
  report.bias_sq = report.bias * report.bias;
  report.mse = report.bias_sq + report.statistical_term;
  return report;
}

// ---- perturbation series ------------------------------------------------------

namespace {

struct SeriesData {
  std::vector<double> one_minus_lambda;
  std::vector<double> a;
  std::vector<double> b;
};

SeriesData series_data(const ScenarioEngine& engine, double phi0,
                       const std::vector<double>& delta_grid) {
  SeriesData data;
  for (double delta : delta_grid) {
    const auto resp = engine.responses(delta, 1);
    const double x_id = engine.ideal().eval(phi0);
    const double q = resp->dominant.eval(phi0);
    data.one_minus_lambda.push_back(1.0 - resp->lambda);
    data.a.push_back(q - x_id);
    // exact tail average: (Tr[A rho] - lambda <psi|A|psi>) / (1 - lambda)
    const double x1 = resp->order(1).z_a.eval(phi0);
    data.b.push_back((x1 - resp->lambda * q) / (1.0 - resp->lambda) - x_id);
  }
  return data;
}

// Least-squares polynomial fit in u = delta/delta_ref. Returns coefficients of
// delta^k for k = k_min..k_min+count-1 and the rms residual.
std::pair<RealVector, double> fit_series(const std::vector<double>& deltas,
                                         const std::vector<double>& values, int degree,
                                         int k_min, int count) {
  const int rows = static_cast<int>(deltas.size());
  const int terms = degree - k_min + 1;
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  if (scale < 1e-10) return {RealVector::Zero(count), 0.0};

  double delta_ref = 0.0;
  for (double d : deltas) delta_ref = std::max(delta_ref, d);
  RealMatrix vand(rows, terms);
  RealVector rhs(rows);
  for (int i = 0; i < rows; ++i) {
    const double u = deltas[i] / delta_ref;
    double p = std::pow(u, k_min);
    for (int t = 0; t < terms; ++t) {
      vand(i, t) = p;
      p *= u;
    }
    rhs(i) = values[i];
  }
  const RealVector sol = vand.colPivHouseholderQr().solve(rhs);
  const double residual = (vand * sol - rhs).norm() / std::sqrt(static_cast<double>(rows));
  if (residual > 1e-6 * scale)
    throw NumericalError("series_coefficients: ill-conditioned fit (residual above 1e-6 of scale)");
  RealVector out = RealVector::Zero(count);
  for (int k = 0; k < count && k < terms; ++k)
    out(k) = sol(k) / std::pow(delta_ref, k_min + k);
  return {out, residual / scale};
}

RealVector assemble_f(const RealVector& lambda_k, const RealVector& a_k, const RealVector& b_k,
                      int max_order) {
  RealVector f = RealVector::Zero(max_order);
  for (int k = 1; k <= max_order; ++k) {
    double value = a_k(k - 1);
    for (int l = 1; l <= k - 1; ++l) value += lambda_k(l - 1) * a_k(k - l - 1);
    for (int l = 1; l <= k; ++l) value -= lambda_k(l - 1) * b_k(k - l);  // b_k(0) is b_0
    f(k - 1) = value;
  }
  return f;
}

}  // namespace

SeriesCoefficients series_coefficients(const ScenarioEngine& engine, double phi0, int max_order,
                                       const std::vector<double>& delta_grid) {
  if (max_order < 1) throw ConfigError("series_coefficients: max_order must be >= 1");
  if (static_cast<int>(delta_grid.size()) < 2 * max_order + 1)
    throw ConfigError("series_coefficients: need at least 2*max_order + 1 grid points");
  for (double d : delta_grid)
    if (d <= 0.0) throw ConfigError("series_coefficients: grid must be strictly positive");

  engine.prepare(std::span<const double>(delta_grid.data(), delta_grid.size()), 1);
  const int degree = max_order + 2;

  const auto fit_at = [&](double at_phi0) {
    const SeriesData data = series_data(engine, at_phi0, delta_grid);
    auto [lam, lam_res] = fit_series(delta_grid, data.one_minus_lambda, degree, 1, max_order);
    auto [aa, a_res] = fit_series(delta_grid, data.a, degree, 1, max_order);
    auto [bb, b_res] = fit_series(delta_grid, data.b, degree, 0, max_order + 1);
    return std::tuple<RealVector, RealVector, RealVector, double>(
        lam, aa, bb, std::max({lam_res, a_res, b_res}));
  };

  auto [lambda_k, a_k, b_k, residual] = fit_at(phi0);

  const double h = 1e-3;
  auto [lam_p, a_p, b_p, res_p] = fit_at(phi0 + h);
  auto [lam_m, a_m, b_m, res_m] = fit_at(phi0 - h);

  SeriesCoefficients out;
  out.phi0 = phi0;
  out.y_id = linearize([&](double t) { return engine.ideal().eval(t); }, phi0).y;
  out.lambda_k = lambda_k;
  out.a_k = a_k;
  out.b_k = b_k;
  out.f_k = assemble_f(lambda_k, a_k, b_k, max_order);
  out.da_k = (a_p - a_m) / (2.0 * h);
  const RealVector f_p = assemble_f(lam_p, a_p, b_p, max_order);
  const RealVector f_m = assemble_f(lam_m, a_m, b_m, max_order);
  out.df_k = (f_p - f_m) / (2.0 * h);
  out.fit_residual = std::max({residual, res_p, res_m});
  return out;
}

LeadingOrder bias_leading_order(const SeriesCoefficients& series, bool mitigated, double phi,
                                int n) {
  if (std::abs(series.y_id) <= 1e-6)
    throw NumericalError("bias_leading_order: degenerate sensitivity");
  constexpr double kNegligible = 1e-8;
  const int available = static_cast<int>(series.a_k.size());
  if (mitigated) {
    if (n < 1) throw ConfigError("bias_leading_order: mitigation order must be >= 1");
    const int limit = std::min(n - 1, available);
    for (int k = 1; k <= limit; ++k) {
      const double c = (series.a_k(k - 1) + phi * series.da_k(k - 1)) / series.y_id;
      if (std::abs(c) > kNegligible) return {k, c, true};
    }
    // the a-series is silent below n: the bias starts at the mitigation order
    return {n, 0.0, false};
  }
  for (int k = 1; k <= available; ++k) {
    const double c = (series.f_k(k - 1) + phi * series.df_k(k - 1)) / series.y_id;
    if (std::abs(c) > kNegligible) return {k, c, true};
  }
  return {INT_MAX, 0.0, false};
}

}  // namespace vpem
