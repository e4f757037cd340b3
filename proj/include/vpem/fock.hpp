#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "vpem/errors.hpp"

namespace vpem {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

namespace tol {
inline constexpr double hermitian = 1e-12;
inline constexpr double psd = 1e-10;       // eigenvalues above -psd are clipped to 0
inline constexpr double unitary = 1e-10;
inline constexpr double imag_residue = 1e-10;
inline constexpr double degenerate_gap = 1e-8;
inline constexpr double trace_power_floor = 1e-30;
}  // namespace tol

/// Truncation geometry for a two-mode bosonic Hilbert space. Basis states
/// |n1,n2> with 0 <= n1,n2 <= cutoff_per_mode are flattened as
/// index = n1*(cutoff_per_mode+1) + n2.
struct FockSpace {
  int cutoff_per_mode = 0;
  int dim = 0;  // (cutoff_per_mode + 1)^2
  double trace_tolerance = 0.0;

  int mode_dim() const { return cutoff_per_mode + 1; }
  int n1(int index) const { return index / mode_dim(); }
  int n2(int index) const { return index % mode_dim(); }
  int index(int m1, int m2) const { return m1 * mode_dim() + m2; }
  bool operator==(const FockSpace&) const = default;
};

FockSpace make_space(int cutoff_per_mode, double trace_tolerance);

struct PureState {
  FockSpace space;
  Vector amplitudes;

  /// 1 - ||amplitudes||^2; the truncation diagnostic (never renormalized away).
  double norm_deficit() const;
  void validate() const;
};

struct DensityMatrix {
  FockSpace space;
  Matrix matrix;

  double trace_deficit() const;
  /// Hermitian within 1e-12, PSD within clipping tolerance, trace within
  /// [1 - trace_tolerance, 1 + 1e-12].
  void validate() const;
};

struct Observable {
  FockSpace space;
  Matrix matrix;
  bool is_involutory = false;

  void validate() const;
};

/// Sorted spectral decomposition of a Hermitian state.
struct EigenDecomposition {
  FockSpace space;
  RealVector eigenvalues;               // descending, clipped at -1e-10 -> 0
  std::vector<PureState> eigenvectors;  // same order, orthonormal
  double dominant_gap = 0.0;            // eigenvalues(0) - eigenvalues(1)
  bool degenerate_dominant = false;     // dominant_gap < 1e-8
};

// ---- single-mode building blocks (dimension cutoff+1) ---------------------

namespace mode {

Matrix annihilation(int dim);
Matrix number(int dim);
Vector fock_vector(int dim, int n);
/// Coherent amplitudes c_n = e^{-|alpha|^2/2} alpha^n / sqrt(n!), truncated.
Vector coherent_vector(int dim, Complex alpha);
/// exp[r (a^2 - a'^2)/2] via dense exponential of the truncated generator;
/// squeezes x for r > 0 (Var x over |r,0> is e^{-2r}/2).
Matrix squeeze_unitary(int dim, double r);
/// exp[beta a' - conj(beta) a].
Matrix displacement_unitary(int dim, Complex beta);
/// Squeezed thermal mixture sum_k nbar^k/(nbar+1)^{k+1} |r,k><r,k|, truncated
/// once the cumulative weight reaches 1 - weight_tol.
Matrix squeezed_thermal(int dim, double r, double nbar, double weight_tol = 1e-10);

}  // namespace mode

// ---- two-mode assembly -----------------------------------------------------

/// Kronecker lift: op acting on `which_mode` (1 or 2), identity on the other.
Matrix lift_to_mode(const FockSpace& space, const Matrix& op, int which_mode);
Vector tensor(const FockSpace& space, const Vector& mode1, const Vector& mode2);
Matrix tensor(const FockSpace& space, const Matrix& mode1, const Matrix& mode2);

/// rho -> (op on mode) rho (op on mode)^dagger without forming the lift.
Matrix conjugate_mode_op(const FockSpace& space, const Matrix& rho, const Matrix& op,
                         int which_mode);

DensityMatrix density_from(const PureState& psi);

/// exp(i H) for Hermitian H, via eigendecomposition.
Matrix exp_i_hermitian(const Matrix& h);

// ---- operations -------------------------------------------------------------

PureState noon_state(const FockSpace& space, int n);
PureState coherent_state(const FockSpace& space, Complex alpha);          // mode 1
PureState squeezed_number_state(const FockSpace& space, double r, int k);  // mode 2

/// Balanced beam splitter exp[i pi/4 (a1' a2 + a1 a2')]. Number-conserving;
/// unitary on the subspace with total photon number <= cutoff.
Matrix beam_splitter(const FockSpace& space);
/// Phase shift e^{i theta n2} (diagonal).
Matrix phase_shift(const FockSpace& space, double theta);
/// Parity of mode 1: A = (-1)^{n1}; involutory by construction.
Observable parity_observable(const FockSpace& space);

/// Re Tr[obs rho]; throws NumericalError if the imaginary residue exceeds 1e-10.
double expectation(const Observable& obs, const DensityMatrix& rho);
double expectation(const Observable& obs, const PureState& psi);

EigenDecomposition eig(const DensityMatrix& rho);

/// rho^n / Tr[rho^n] via eigenvalue powers.
DensityMatrix matrix_power_normalized(const DensityMatrix& rho, int n);

/// Constant offset delta0 such that the parity response of the ideal N00N
/// output at angle theta + delta0 equals sin(N theta) on a 17-point probe
/// grid (within 1e-10). Pins the paper-independent beam-splitter convention
/// to the canonical sine form used by every N00N formula downstream.
double calibrate_convention(const FockSpace& space, int n);

}  // namespace vpem
