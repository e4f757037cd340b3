#pragma once

#include <cstdint>

#include "vpem/fock.hpp"

namespace vpem {

struct DominantEigenpair {
  double lambda = 0.0;
  PureState psi;      // global phase fixed: largest-magnitude amplitude real positive
  double gap = 0.0;   // lambda - lambda_2
  bool degenerate = false;  // gap < 1e-8: downstream reports are unreliable
};

/// Top eigenpair of an error state. Uses a full decomposition on small spaces
/// and deflated power iteration on large ones.
DominantEigenpair dominant_eigenpair(const DensityMatrix& rho);

struct CircuitExpectations {
  double z_a;  // <Z_bar^A> = Tr[A rho^n]
  double z_i;  // <Z_bar^I> = Tr[rho^n]
};

/// Outcome means of the two mitigation circuits of order n, evaluated through
/// the eigendecomposition of rho. Requires an involutory observable (single
/// shots must be +-1).
CircuitExpectations circuit_expectations(const DensityMatrix& rho, const Observable& a, int n);

/// Tr[A rho^n] / Tr[rho^n]; agrees with expectation(a, matrix_power_normalized(rho, n)).
double mitigated_expectation(const DensityMatrix& rho, const Observable& a, int n);

/// Averages of +-1 outcomes from one emulated run of the two circuits.
struct CircuitShots {
  int n = 1;
  long long n_shots = 0;
  double z_a_mean = 0.0;
  double z_i_mean = 0.0;
  std::uint64_t seed = 0;
};

CircuitShots sample_circuits(const DensityMatrix& rho, const Observable& a, int n,
                             long long n_shots, std::uint64_t seed);
/// Same emulation when the circuit expectations are already known.
CircuitShots sample_circuits_from(double z_a, double z_i, int n, long long n_shots,
                                  std::uint64_t seed);

/// phi_est = (Z_bar^A / Z_bar^I - x_id) / y_id.
double estimate_mitigated_from_shots(const CircuitShots& shots, double x_id, double y_id);

}  // namespace vpem
