#include "vpem/noise.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "vpem/parallel.hpp"
#include "vpem/quadrature.hpp"

namespace vpem {

void NoiseKind::validate() const {
  if (delta < 0.0) throw ConfigError("NoiseKind: delta must be >= 0");
  if (kind == Kind::PhotonLoss && delta > 1.0)
    throw ConfigError("NoiseKind: loss rate delta must be in [0, 1]");
}

double NoiseKind::sigma_x() const { return std::sqrt(delta / 2.0) * std::exp(-r_match); }
double NoiseKind::sigma_p() const { return std::sqrt(delta / 2.0) * std::exp(r_match); }

const char* NoiseKind::name(Kind kind) {
  switch (kind) {
    case Kind::PhaseDiffusion: return "phase_diffusion";
    case Kind::PhotonLoss: return "photon_loss";
    case Kind::AdditiveGaussian: return "additive_gaussian";
  }
  return "?";
}

// ---- phase diffusion ---------------------------------------------------------

namespace {

Matrix diffusion_mixture(const std::function<DensityMatrix(double)>& state_builder, double delta,
                         int nodes) {
  const auto rule = quadrature::gaussian_average(nodes, std::sqrt(delta));
  const DensityMatrix first = state_builder(0.0);
  Matrix acc = Matrix::Zero(first.matrix.rows(), first.matrix.cols());
  parallel::accumulate_terms(acc, static_cast<std::size_t>(rule.size()), [&](std::size_t k) {
    return Matrix(rule.weights[k] * state_builder(rule.nodes[k]).matrix);
  });
  return acc;
}

}  // namespace

DensityMatrix phase_diffusion_quadrature(const std::function<DensityMatrix(double)>& state_builder,
                                         double delta, int nodes, bool check_convergence) {
  if (delta < 0.0) throw ConfigError("phase_diffusion_quadrature: delta must be >= 0");
  if (nodes < 3 || nodes % 2 == 0)
    throw ConfigError("phase_diffusion_quadrature: nodes must be odd and >= 3");
  if (delta == 0.0) return state_builder(0.0);
  DensityMatrix out = state_builder(0.0);
  out.matrix = diffusion_mixture(state_builder, delta, nodes);
  if (check_convergence) {
    const Matrix refined = diffusion_mixture(state_builder, delta, 2 * nodes + 1);
    if ((refined - out.matrix).cwiseAbs().maxCoeff() > 1e-8)
      throw NumericalError("phase_diffusion_quadrature: not converged at requested node count");
  }
  return out;
}

DensityMatrix phase_diffusion_noon_analytic(const FockSpace& space, int n, double theta,
                                            double delta) {
  if (n > space.cutoff_per_mode)
    throw ConfigError("phase_diffusion_noon_analytic: N exceeds cutoff");
  const Matrix u = beam_splitter(space) * phase_shift(space, theta);
  Vector plus = Vector::Zero(space.dim);
  Vector minus = Vector::Zero(space.dim);
  const double w = 1.0 / std::numbers::sqrt2;
  plus(space.index(n, 0)) = w;
  plus(space.index(0, n)) = w;
  minus(space.index(n, 0)) = w;
  minus(space.index(0, n)) = -w;
  const Vector psi_id = u * plus;
  const Vector psi_perp = u * minus;
  const double lambda = 0.5 * (1.0 + std::exp(-0.5 * delta * n * n));
  Matrix rho = lambda * (psi_id * psi_id.adjoint());
  rho.noalias() += (1.0 - lambda) * (psi_perp * psi_perp.adjoint());
  return DensityMatrix{space, std::move(rho)};
}

// ---- photon loss ---------------------------------------------------------------

std::vector<Matrix> loss_kraus_single_mode(int dim, double delta) {
  std::vector<Matrix> kraus;
  kraus.reserve(dim);
  const double eta = 1.0 - delta;
  double ck = 1.0;  // sqrt(delta^k / k!)
  for (int k = 0; k < dim; ++k) {
    if (k > 0) ck *= std::sqrt(delta / k);
    Matrix op = Matrix::Zero(dim, dim);
    for (int n = k; n < dim; ++n) {
      double fall = 1.0;  // n! / (n-k)!
      for (int j = 0; j < k; ++j) fall *= static_cast<double>(n - j);
      op(n - k, n) = ck * std::pow(eta, 0.5 * (n - k)) * std::sqrt(fall);
    }
    kraus.push_back(std::move(op));
  }
  return kraus;
}

namespace {

// kappa(k, n') = sqrt(delta^k/k!) (1-delta)^{n'/2} sqrt((n'+k)!/n'!), the
// amplitude taking |n'+k> to |n'> after losing k photons.
RealMatrix loss_amplitudes(int m, double delta) {
  RealMatrix kappa = RealMatrix::Zero(m, m);
  const double eta = 1.0 - delta;
  double ck = 1.0;
  for (int k = 0; k < m; ++k) {
    if (k > 0) ck *= std::sqrt(delta / k);
    for (int n = 0; n + k < m; ++n) {
      double fall = 1.0;
      for (int j = 1; j <= k; ++j) fall *= static_cast<double>(n + j);
      kappa(k, n) = ck * std::pow(eta, 0.5 * n) * std::sqrt(fall);
    }
  }
  return kappa;
}

// Applies the loss channel to one mode. Each output element gathers its own
// Kraus terms, so rows can be processed in parallel with results independent
// of the thread count.
Matrix apply_loss_mode(const FockSpace& space, const Matrix& rho, double delta, int which_mode) {
  const int m = space.mode_dim();
  const int dim = space.dim;
  const RealMatrix kappa = loss_amplitudes(m, delta);
  Matrix out(dim, dim);
  parallel::parallel_for(static_cast<std::size_t>(dim), [&](std::size_t row) {
    const int i = static_cast<int>(row);
    const int ia = space.n1(i), in = space.n2(i);
    const int ilevel = (which_mode == 1) ? ia : in;
    for (int j = 0; j < dim; ++j) {
      const int ja = space.n1(j), jn = space.n2(j);
      const int jlevel = (which_mode == 1) ? ja : jn;
      const int kmax = m - 1 - std::max(ilevel, jlevel);
      Complex sum{0.0, 0.0};
      for (int k = 0; k <= kmax; ++k) {
        const int src_i = (which_mode == 1) ? space.index(ia + k, in) : space.index(ia, in + k);
        const int src_j = (which_mode == 1) ? space.index(ja + k, jn) : space.index(ja, jn + k);
        sum += kappa(k, ilevel) * kappa(k, jlevel) * rho(src_i, src_j);
      }
      out(i, j) = sum;
    }
  });
  return out;
}

}  // namespace

DensityMatrix photon_loss(const DensityMatrix& rho, double delta, LossModes modes) {
  if (delta < 0.0 || delta > 1.0) throw ConfigError("photon_loss: delta must be in [0, 1]");
  if (delta == 0.0) return rho;
  Matrix out = rho.matrix;
  if (modes == LossModes::Mode1 || modes == LossModes::Both)
    out = apply_loss_mode(rho.space, out, delta, 1);
  if (modes == LossModes::Mode2 || modes == LossModes::Both)
    out = apply_loss_mode(rho.space, out, delta, 2);
  DensityMatrix result{rho.space, std::move(out)};
  const double lost = result.trace_deficit() - rho.trace_deficit();
  if (lost > rho.space.trace_tolerance)
    throw TruncationError("photon_loss: trace loss beyond the deficit budget");
  return result;
}

SqueezedThermalParams loss_squeezed_thermal_params(double n_squeezed, double delta) {
  const double eta = 1.0 - delta;
  const double nbar = 0.5 * (-1.0 + std::sqrt(1.0 - 4.0 * n_squeezed * (eta * eta - eta)));
  const double root = std::sqrt(n_squeezed * n_squeezed + n_squeezed);
  const double rbar =
      0.25 * std::log((eta * (2.0 * n_squeezed + 2.0 * root) + 1.0) /
                      (eta * (2.0 * n_squeezed - 2.0 * root) + 1.0));
  return SqueezedThermalParams{nbar, rbar};
}

DensityMatrix loss_squeezed_thermal_analytic(const FockSpace& space, double r, double delta) {
  if (delta < 0.0 || delta > 1.0)
    throw ConfigError("loss_squeezed_thermal_analytic: delta must be in [0, 1]");
  const double n_squeezed = std::sinh(r) * std::sinh(r);
  const auto params = loss_squeezed_thermal_params(n_squeezed, delta);
  const Matrix st = mode::squeezed_thermal(space.mode_dim(), params.rbar, params.nbar);
  Matrix vac = Matrix::Zero(space.mode_dim(), space.mode_dim());
  vac(0, 0) = 1.0;
  return DensityMatrix{space, tensor(space, vac, st)};
}

// ---- additive Gaussian noise -----------------------------------------------------

namespace {

template <class ConjugateFn>
Matrix gaussian_displacement_mixture(int mode_dim, const Matrix& rho, double sigma_x,
                                     double sigma_p, int nodes_per_axis, ConjugateFn&& conj_op) {
  const auto rx = quadrature::gaussian_average(nodes_per_axis, sigma_x);
  const auto rp = quadrature::gaussian_average(nodes_per_axis, sigma_p);
  const std::size_t total = static_cast<std::size_t>(rx.size()) * rp.size();
  Matrix acc = Matrix::Zero(rho.rows(), rho.cols());
  parallel::accumulate_terms(acc, total, [&](std::size_t idx) {
    const int ix = static_cast<int>(idx / rp.size());
    const int ip = static_cast<int>(idx % rp.size());
    const Complex beta{rx.nodes[ix], rp.nodes[ip]};
    const Matrix d = mode::displacement_unitary(mode_dim, beta);
    return Matrix((rx.weights[ix] * rp.weights[ip]) * conj_op(rho, d));
  });
  return acc;
}

}  // namespace

Matrix additive_gaussian_single_mode(const Matrix& rho, double sigma_x, double sigma_p,
                                     int nodes_per_axis) {
  if (sigma_x < 0.0 || sigma_p < 0.0)
    throw ConfigError("additive_gaussian: spreads must be >= 0");
  if (sigma_x == 0.0 && sigma_p == 0.0) return rho;
  const int m = static_cast<int>(rho.rows());
  return gaussian_displacement_mixture(m, rho, sigma_x, sigma_p, nodes_per_axis,
                                       [](const Matrix& state, const Matrix& d) -> Matrix {
                                         return d * state * d.adjoint();
                                       });
}

DensityMatrix additive_gaussian(const DensityMatrix& rho, double sigma_x, double sigma_p,
                                int which_mode, int nodes_per_axis) {
  if (sigma_x < 0.0 || sigma_p < 0.0)
    throw ConfigError("additive_gaussian: spreads must be >= 0");
  if (which_mode != 1 && which_mode != 2)
    throw ConfigError("additive_gaussian: mode must be 1 or 2");
  if (sigma_x == 0.0 && sigma_p == 0.0) return rho;
  const FockSpace& space = rho.space;
  Matrix mixed = gaussian_displacement_mixture(
      space.mode_dim(), rho.matrix, sigma_x, sigma_p, nodes_per_axis,
      [&](const Matrix& state, const Matrix& d) -> Matrix {
        return conjugate_mode_op(space, state, d, which_mode);
      });
  return DensityMatrix{space, std::move(mixed)};
}

// ---- dominant-eigenvalue inversion -------------------------------------------------

double delta_for_lambda(const std::function<double(double)>& lambda_of_delta,
                        double lambda_target, double lo, double hi, int max_iters, double tol) {
  if (lambda_target <= 0.0 || lambda_target > 1.0)
    throw ConfigError("delta_for_lambda: target must be in (0, 1]");
  const double f_lo = lambda_of_delta(lo);
  if (std::abs(f_lo - lambda_target) <= tol) return lo;
  const double f_hi = lambda_of_delta(hi);
  if (f_lo < lambda_target || f_hi > lambda_target) {
    std::ostringstream msg;
    msg << "delta_for_lambda: target " << lambda_target << " not bracketed by lambda("
        << lo << ") = " << f_lo << " and lambda(" << hi << ") = " << f_hi;
    throw SearchError(msg.str());
  }
  double a = lo, b = hi;
  double mid = 0.5 * (a + b);
  for (int it = 0; it < max_iters; ++it) {
    mid = 0.5 * (a + b);
    const double f = lambda_of_delta(mid);
    if (std::abs(f - lambda_target) <= tol) return mid;
    if (f > lambda_target)
      a = mid;
    else
      b = mid;
  }
  return mid;
}

}  // namespace vpem
