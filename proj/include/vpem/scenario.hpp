#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "vpem/fock.hpp"
#include "vpem/mitigation.hpp"
#include "vpem/noise.hpp"

namespace vpem {

enum class ProbeKind { Noon, CoherentSqueezed };

struct ProbeSpec {
  ProbeKind kind = ProbeKind::Noon;
  int noon_n = 5;
  double n_coherent = 2.5;  // |alpha|^2
  double n_squeezed = 2.5;  // sinh^2 r

  double alpha() const { return std::sqrt(n_coherent); }
  double squeezing() const { return std::asinh(std::sqrt(n_squeezed)); }
  void validate(int cutoff) const;
  bool operator==(const ProbeSpec&) const = default;
};

/// Which construction backs the error state. Analytic uses the closed-form
/// decompositions (exact on the truncated space where available); Numeric uses
/// the quadrature/Kraus channels. Auto picks the exact one per combination.
enum class ChannelRoute { Auto, Analytic, Numeric };

/// The unit of experiment configuration: probe + noise + truncation +
/// channel route. Reference points and grids live in the run configuration.
struct Scenario {
  ProbeSpec probe;
  NoiseKind::Kind noise = NoiseKind::Kind::PhaseDiffusion;
  int cutoff = 5;
  double trace_tolerance = 1e-10;
  ChannelRoute route = ChannelRoute::Auto;
  int diffusion_nodes = 61;
  int gaussian_nodes = 41;

  std::string id() const;  // stable string used for seed derivation
  static Scenario noon(int n, NoiseKind::Kind noise, int cutoff = 6);
  static Scenario coherent_squeezed(NoiseKind::Kind noise, int cutoff = 31);
};

/// x(theta) = c0 + 2 Re sum_{d>=1} c_d e^{i d theta}. Exact representation of
/// Tr[A rho^n(theta)] for any state conjugated by the diagonal encoding phase.
class PhaseResponse {
 public:
  PhaseResponse() = default;
  PhaseResponse(double c0, Vector cplus) : c0_(c0), cplus_(std::move(cplus)) {}

  double eval(double theta) const;
  double derivative(double theta) const;
  int max_harmonic() const { return static_cast<int>(cplus_.size()); }

 private:
  double c0_ = 0.0;
  Vector cplus_;  // c_d for d = 1..D
};

struct OrderResponse {
  int n = 1;
  PhaseResponse z_a;   // Tr[A rho^n(theta)]
  double z_i = 1.0;    // Tr[rho^n]

  /// The estimator-facing expectation: raw Tr[A rho] for n = 1 (the error
  /// case measures A directly), the circuit ratio for n >= 2.
  double x(double theta) const { return n == 1 ? z_a.eval(theta) : z_a.eval(theta) / z_i; }
};

/// Everything the estimation layer needs at a single noise strength.
struct NoisyResponses {
  double delta = 0.0;
  double trace = 1.0;          // Tr[rho_0]
  double lambda = 1.0;         // dominant eigenvalue (theta-independent)
  double gap = 1.0;
  bool degenerate = false;
  PhaseResponse dominant;      // <psi(theta)| A |psi(theta)>
  std::vector<OrderResponse> orders;  // n = 1..max order built so far

  const OrderResponse& order(int n) const;
};

/// Precomputed per-scenario machinery. The encoding angle always enters as a
/// diagonal phase, so the error state at angle theta is
///   U_BS Phi(theta + delta0) rho_0 Phi(theta + delta0)^dagger U_BS^dagger
/// with a theta-independent noisy pre-encoding state rho_0. N00N scenarios
/// absorb the calibration offset delta0 so the canonical sine response holds.
class ScenarioEngine {
 public:
  explicit ScenarioEngine(Scenario scenario);

  const Scenario& scenario() const { return scenario_; }
  const FockSpace& space() const { return space_; }
  const Observable& parity() const { return parity_; }
  const Matrix& beam_splitter_unitary() const { return u_bs_; }
  double calibration_offset() const { return delta0_; }

  /// Ideal response x_id(theta) = Tr[A rho_id(theta)].
  const PhaseResponse& ideal() const { return ideal_; }
  double ideal_trace() const { return ideal_trace_; }

  /// Noisy pre-encoding state (probe after noise, before phase encoding).
  DensityMatrix pre_encoding_state(double delta) const;
  /// Full error state at absolute encoding angle theta = phi + phi0.
  DensityMatrix error_state(double delta, double theta) const;
  PureState ideal_output(double theta) const;

  /// Cached responses; builds on first use. Returned snapshots stay valid
  /// after later cache updates.
  std::shared_ptr<const NoisyResponses> responses(double delta, int max_order) const;
  /// Prebuilds responses for a batch of noise strengths, in parallel.
  void prepare(std::span<const double> deltas, int max_order) const;

  /// Dominant eigenvalue as a function of delta (used for lambda targeting).
  double dominant_lambda(double delta) const;

 private:
  Matrix build_rho0(double delta) const;
  PhaseResponse extract_response(const Matrix& rho) const;
  std::shared_ptr<NoisyResponses> build_responses(double delta, int max_order) const;

  Scenario scenario_;
  FockSpace space_;
  Observable parity_;
  Matrix u_bs_;
  Matrix obs_encoded_;  // U_BS^dagger A U_BS
  double delta0_ = 0.0;
  PureState probe_;     // pre-encoding probe (includes the probe beam splitter for CS)
  PhaseResponse ideal_;
  double ideal_trace_ = 1.0;

  mutable std::mutex cache_mutex_;
  mutable std::map<double, std::shared_ptr<const NoisyResponses>> cache_;
};

}  // namespace vpem
