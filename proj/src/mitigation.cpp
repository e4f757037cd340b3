#include "vpem/mitigation.hpp"

#include <cmath>

#include "vpem/rng.hpp"

namespace vpem {

namespace {

constexpr int kFullEigDimLimit = 256;
constexpr int kPowerMaxIters = 20000;

Vector deterministic_start(int dim) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i) {
    const std::uint64_t h = rng::mix64(0x5eedf0ccu + static_cast<std::uint64_t>(i));
    const double re = static_cast<double>(h >> 32) / 4294967296.0 - 0.5;
    const double im = static_cast<double>(h & 0xffffffffu) / 4294967296.0 - 0.5;
    v(i) = Complex{re, im};
  }
  v.normalize();
  return v;
}

void fix_global_phase(Vector& v) {
  int imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  const Complex pivot = v(imax);
  if (std::abs(pivot) > 0.0) v *= std::conj(pivot) / std::abs(pivot);
}

// Power iteration for the leading eigenpair of a PSD matrix, optionally
// deflated against an already-found eigenvector.
bool power_iterate(const Matrix& rho, const Vector* deflate, double deflate_lambda,
                   double rel_tol, double& lambda, Vector& v) {
  v = deterministic_start(static_cast<int>(rho.rows()));
  if (deflate) v -= (*deflate) * deflate->dot(v);
  v.normalize();
  Vector w(v.size());
  for (int it = 0; it < kPowerMaxIters; ++it) {
    w.noalias() = rho * v;
    if (deflate) w -= deflate_lambda * ((*deflate) * deflate->dot(v));
    lambda = v.dot(w).real();
    const double resid = (w - lambda * v).norm();
    const double nw = w.norm();
    if (nw <= 0.0) {  // annihilated: eigenvalue 0
      lambda = 0.0;
      return true;
    }
    v = w / nw;
    if (deflate) {
      v -= (*deflate) * deflate->dot(v);
      v.normalize();
    }
    if (resid <= rel_tol * std::max(std::abs(lambda), 1e-30)) return true;
  }
  return false;
}

}  // namespace

DominantEigenpair dominant_eigenpair(const DensityMatrix& rho) {
  const int dim = rho.space.dim;
  DominantEigenpair out;
  if (dim <= kFullEigDimLimit) {
    const EigenDecomposition dec = eig(rho);
    out.lambda = dec.eigenvalues(0);
    out.psi = dec.eigenvectors[0];
    out.gap = dec.dominant_gap;
    out.degenerate = dec.degenerate_dominant;
    fix_global_phase(out.psi.amplitudes);
    return out;
  }
  double lambda1 = 0.0;
  Vector v1;
  if (!power_iterate(rho.matrix, nullptr, 0.0, 1e-12, lambda1, v1)) {
    // slow convergence means a near-degenerate top; fall back to the full solve
    const EigenDecomposition dec = eig(rho);
    out.lambda = dec.eigenvalues(0);
    out.psi = dec.eigenvectors[0];
    out.gap = dec.dominant_gap;
    out.degenerate = dec.degenerate_dominant;
    fix_global_phase(out.psi.amplitudes);
    return out;
  }
  double lambda2 = 0.0;
  Vector v2;
  power_iterate(rho.matrix, &v1, lambda1, 1e-6, lambda2, v2);
  fix_global_phase(v1);
  out.lambda = lambda1;
  out.psi = PureState{rho.space, std::move(v1)};
  out.gap = lambda1 - lambda2;
  out.degenerate = out.gap < tol::degenerate_gap;
  return out;
}

CircuitExpectations circuit_expectations(const DensityMatrix& rho, const Observable& a, int n) {
  if (!a.is_involutory)
    throw NumericalError("circuit_expectations: observable must be involutory (+-1 outcomes)");
  if (n < 1) throw ConfigError("circuit_expectations: order must be >= 1");
  const EigenDecomposition dec = eig(rho);
  const int dim = rho.space.dim;
  double z_a = 0.0, z_i = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double mu = dec.eigenvalues(k);
    if (mu == 0.0) continue;
    const double mun = std::pow(mu, n);
    z_a += mun * expectation(a, dec.eigenvectors[k]);
    z_i += mun;
  }
  if (std::abs(z_a) > 1.0 + tol::psd || z_i > 1.0 + tol::psd)
    throw NumericalError("circuit_expectations: outcome mean outside [-1, 1]");
  return CircuitExpectations{z_a, z_i};
}

double mitigated_expectation(const DensityMatrix& rho, const Observable& a, int n) {
  const CircuitExpectations c = circuit_expectations(rho, a, n);
  if (c.z_i <= tol::trace_power_floor)
    throw NumericalError("mitigated_expectation: Tr[rho^n] vanishes");
  return c.z_a / c.z_i;
}

CircuitShots sample_circuits(const DensityMatrix& rho, const Observable& a, int n,
                             long long n_shots, std::uint64_t seed) {
  const CircuitExpectations c = circuit_expectations(rho, a, n);
  return sample_circuits_from(c.z_a, c.z_i, n, n_shots, seed);
}

CircuitShots sample_circuits_from(double z_a, double z_i, int n, long long n_shots,
                                  std::uint64_t seed) {
  if (n_shots < 1) throw ConfigError("sample_circuits: n_shots must be >= 1");
  std::mt19937_64 gen(seed);
  CircuitShots shots;
  shots.n = n;
  shots.n_shots = n_shots;
  shots.seed = seed;
  shots.z_a_mean = rng::sample_outcome_mean(z_a, n_shots, gen);
  shots.z_i_mean = rng::sample_outcome_mean(z_i, n_shots, gen);
  return shots;
}

double estimate_mitigated_from_shots(const CircuitShots& shots, double x_id, double y_id) {
  if (shots.z_i_mean == 0.0)
    throw SamplingError("estimate_mitigated_from_shots: Z_bar^I sampled as 0, ratio undefined");
  if (std::abs(y_id) <= 1e-6)
    throw SamplingError("estimate_mitigated_from_shots: degenerate sensitivity |y_id| <= 1e-6");
  return (shots.z_a_mean / shots.z_i_mean - x_id) / y_id;
}

}  // namespace vpem
