#pragma once

#include <functional>
#include <vector>

#include "vpem/fock.hpp"

namespace vpem {

/// One of the three channels, with its strength. For AdditiveGaussian the
/// displacement spreads are tied to a squeezing parameter:
/// sigma_x = sqrt(delta/2) e^{-r_match}, sigma_p = sqrt(delta/2) e^{+r_match}.
struct NoiseKind {
  enum class Kind { PhaseDiffusion, PhotonLoss, AdditiveGaussian };

  Kind kind = Kind::PhaseDiffusion;
  double delta = 0.0;
  double r_match = 0.0;

  void validate() const;
  double sigma_x() const;
  double sigma_p() const;
  static const char* name(Kind kind);
};

enum class LossModes { Mode1, Mode2, Both };

/// Gaussian mixture over a random phase offset x:
///   integral dx exp(-x^2 / 2 delta) / sqrt(2 pi delta) * state_builder(x),
/// evaluated by Gauss-Hermite quadrature. state_builder(x) must return the
/// output state with the random offset x added to its encoding angle.
/// Returns state_builder(0) exactly when delta == 0.
DensityMatrix phase_diffusion_quadrature(
    const std::function<DensityMatrix(double)>& state_builder, double delta, int nodes,
    bool check_convergence = true);

/// Closed-form N00N dephasing at absolute encoding angle theta:
/// lambda |psi_id><psi_id| + (1 - lambda) |psi_perp><psi_perp| with
/// lambda = (1 + e^{-delta N^2 / 2}) / 2.
DensityMatrix phase_diffusion_noon_analytic(const FockSpace& space, int n, double theta,
                                            double delta);

/// Bosonic loss channel, Kraus rank cutoff+1 per mode:
///   K_k = sqrt(delta^k / k!) (1-delta)^{n_hat/2} a^k.
/// Exactly trace-preserving on the truncated space.
DensityMatrix photon_loss(const DensityMatrix& rho, double delta, LossModes modes = LossModes::Both);

/// Single-mode loss Kraus operators (for oracle tests).
std::vector<Matrix> loss_kraus_single_mode(int dim, double delta);

struct SqueezedThermalParams {
  double nbar;  // thermal occupation after loss
  double rbar;  // squeezing parameter after loss
};
/// Loss image of squeezed vacuum with sinh^2 r = n_squeezed:
/// occupation and squeezing of the resulting squeezed thermal state.
SqueezedThermalParams loss_squeezed_thermal_params(double n_squeezed, double delta);

/// Closed-form loss image of the mode-2 squeezed vacuum |r,0>:
/// vacuum(mode 1) (x) sum_k nbar^k/(nbar+1)^{k+1} |rbar,k><rbar,k| (mode 2),
/// series truncated at cumulative weight 1 - 1e-10.
DensityMatrix loss_squeezed_thermal_analytic(const FockSpace& space, double r, double delta);

/// Random-displacement channel on one mode:
///   integral dx dp N(x;sx^2) N(p;sp^2) D(x+ip) rho D(x+ip)^dagger
/// by a 2-D Gauss-Hermite rule with nodes_per_axis points per axis.
DensityMatrix additive_gaussian(const DensityMatrix& rho, double sigma_x, double sigma_p,
                                int which_mode, int nodes_per_axis = 41);

/// Same channel on a bare single-mode density matrix.
Matrix additive_gaussian_single_mode(const Matrix& rho, double sigma_x, double sigma_p,
                                     int nodes_per_axis = 41);

/// Bisection for the noise strength at which the dominant eigenvalue of the
/// error state reaches lambda_target. lambda_of_delta must be monotone
/// decreasing over [lo, hi]; the default bracket stays below the loss
/// channel's non-monotone turning point at delta = 1/2.
double delta_for_lambda(const std::function<double(double)>& lambda_of_delta,
                        double lambda_target, double lo = 0.0, double hi = 0.5,
                        int max_iters = 60, double tol = 1e-4);

}  // namespace vpem
