#include "vpem/scenario.hpp"

#include <cmath>
#include <sstream>

#include "vpem/parallel.hpp"
#include "vpem/quadrature.hpp"

namespace vpem {

namespace {
constexpr Complex kI{0.0, 1.0};
}

void ProbeSpec::validate(int cutoff) const {
  if (kind == ProbeKind::Noon) {
    if (noon_n < 1) throw ConfigError("probe: N00N order must be >= 1");
    if (noon_n > cutoff) throw ConfigError("probe: N00N order exceeds the cutoff");
  } else {
    if (n_coherent < 0.0 || n_squeezed < 0.0)
      throw ConfigError("probe: mean photon numbers must be >= 0");
  }
}

std::string Scenario::id() const {
  std::ostringstream s;
  if (probe.kind == ProbeKind::Noon)
    s << "noon" << probe.noon_n;
  else
    s << "cs_nc" << probe.n_coherent << "_nr" << probe.n_squeezed;
  s << "|" << NoiseKind::name(noise) << "|c" << cutoff;
  return s.str();
}

Scenario Scenario::noon(int n, NoiseKind::Kind noise, int cutoff) {
  Scenario s;
  s.probe = ProbeSpec{ProbeKind::Noon, n, 0.0, 0.0};
  s.noise = noise;
  s.cutoff = cutoff;
  s.trace_tolerance = 1e-10;
  return s;
}

Scenario Scenario::coherent_squeezed(NoiseKind::Kind noise, int cutoff) {
  Scenario s;
  s.probe = ProbeSpec{ProbeKind::CoherentSqueezed, 0, 2.5, 2.5};
  s.noise = noise;
  s.cutoff = cutoff;
  // The squeezed factor keeps ~1e-3 of its weight above n = 31; the tolerance
  // has to admit that, and results inherit an error of the same order.
  s.trace_tolerance = 1e-2;
  return s;
}

// ---- PhaseResponse ----------------------------------------------------------

double PhaseResponse::eval(double theta) const {
  const Complex rot = std::exp(kI * theta);
  Complex power = rot;
  double acc = c0_;
  for (Eigen::Index d = 0; d < cplus_.size(); ++d) {
    acc += 2.0 * (cplus_(d) * power).real();
    power *= rot;
  }
  return acc;
}

double PhaseResponse::derivative(double theta) const {
  const Complex rot = std::exp(kI * theta);
  Complex power = rot;
  double acc = 0.0;
  for (Eigen::Index d = 0; d < cplus_.size(); ++d) {
    acc += 2.0 * (kI * static_cast<double>(d + 1) * cplus_(d) * power).real();
    power *= rot;
  }
  return acc;
}

const OrderResponse& NoisyResponses::order(int n) const {
  for (const auto& o : orders)
    if (o.n == n) return o;
  throw ConfigError("NoisyResponses: order not prepared");
}

// ---- ScenarioEngine -----------------------------------------------------------

ScenarioEngine::ScenarioEngine(Scenario scenario)
    : scenario_(std::move(scenario)),
      space_(make_space(scenario_.cutoff, scenario_.trace_tolerance)) {
  scenario_.probe.validate(scenario_.cutoff);
  parity_ = parity_observable(space_);
  u_bs_ = beam_splitter(space_);
  obs_encoded_ = u_bs_.adjoint() * parity_.matrix * u_bs_;
  if (scenario_.probe.kind == ProbeKind::Noon) {
    probe_ = noon_state(space_, scenario_.probe.noon_n);
    delta0_ = calibrate_convention(space_, scenario_.probe.noon_n);
  } else {
    const int m = space_.mode_dim();
    const Vector coh = mode::coherent_vector(m, scenario_.probe.alpha());
    const Vector sq = mode::squeeze_unitary(m, scenario_.probe.squeezing()).col(0);
    probe_ = PureState{space_, u_bs_ * tensor(space_, coh, sq)};
    probe_.validate();
    delta0_ = 0.0;
  }
  ideal_ = extract_response(probe_.amplitudes * probe_.amplitudes.adjoint());
  ideal_trace_ = probe_.amplitudes.squaredNorm();
}

PhaseResponse ScenarioEngine::extract_response(const Matrix& rho) const {
  // Tr[A U_BS Phi rho Phi' U_BS'] = sum_{j,k} M_jk rho_kj e^{i theta (n2_k - n2_j)}
  // with M = U_BS' A U_BS; group by the harmonic d = n2_k - n2_j and absorb
  // the calibration offset into the coefficients.
  const int dim = space_.dim;
  const int cmax = space_.cutoff_per_mode;
  Vector coeff = Vector::Zero(2 * cmax + 1);  // d = -cmax..cmax at index d + cmax
  for (int j = 0; j < dim; ++j) {
    const int n2j = space_.n2(j);
    for (int k = 0; k < dim; ++k) {
      const int d = space_.n2(k) - n2j;
      coeff(d + cmax) += obs_encoded_(j, k) * rho(k, j);
    }
  }
  double c0 = coeff(cmax).real();
  Vector cplus(cmax);
  for (int d = 1; d <= cmax; ++d) {
    // fold conjugate harmonics; exact for Hermitian rho
    const Complex cd = 0.5 * (coeff(cmax + d) + std::conj(coeff(cmax - d)));
    cplus(d - 1) = cd * std::exp(kI * (static_cast<double>(d) * delta0_));
  }
  return PhaseResponse(c0, std::move(cplus));
}

Matrix ScenarioEngine::build_rho0(double delta) const {
  const ProbeKind probe = scenario_.probe.kind;
  const NoiseKind::Kind noise = scenario_.noise;
  ChannelRoute route = scenario_.route;
  if (route == ChannelRoute::Auto) {
    // pick the construction that is exact on the truncated space
    if (noise == NoiseKind::Kind::PhaseDiffusion)
      route = ChannelRoute::Analytic;
    else if (noise == NoiseKind::Kind::PhotonLoss)
      route = (probe == ProbeKind::Noon) ? ChannelRoute::Numeric : ChannelRoute::Analytic;
    else
      route = (probe == ProbeKind::Noon) ? ChannelRoute::Numeric : ChannelRoute::Analytic;
  }
  const Matrix rho_probe = probe_.amplitudes * probe_.amplitudes.adjoint();
  if (delta == 0.0) return rho_probe;

  switch (noise) {
    case NoiseKind::Kind::PhaseDiffusion: {
      // Mixing over the random encoding offset multiplies element (i, j) by
      // E[e^{i x (n2_i - n2_j)}]; analytic: e^{-delta d^2 / 2}.
      const int cmax = space_.cutoff_per_mode;
      Vector mult(2 * cmax + 1);
      if (route == ChannelRoute::Analytic) {
        for (int d = -cmax; d <= cmax; ++d)
          mult(d + cmax) = std::exp(-0.5 * delta * d * d);
      } else {
        const auto rule = quadrature::gaussian_average(scenario_.diffusion_nodes,
                                                       std::sqrt(delta));
        for (int d = -cmax; d <= cmax; ++d) {
          Complex g{0.0, 0.0};
          for (int q = 0; q < rule.size(); ++q)
            g += rule.weights[q] * std::exp(kI * (rule.nodes[q] * d));
          mult(d + cmax) = g;
        }
      }
      Matrix out(space_.dim, space_.dim);
      for (int i = 0; i < space_.dim; ++i)
        for (int j = 0; j < space_.dim; ++j)
          out(i, j) = rho_probe(i, j) * mult(space_.n2(i) - space_.n2(j) + cmax);
      return out;
    }
    case NoiseKind::Kind::PhotonLoss: {
      if (route == ChannelRoute::Numeric || probe == ProbeKind::Noon)
        return photon_loss(DensityMatrix{space_, rho_probe}, delta).matrix;
      // closed form: loss commutes with the linear optics, so it acts on the
      // coherent and squeezed factors before the probe beam splitter
      const int m = space_.mode_dim();
      const double alpha_bar = std::sqrt(1.0 - delta) * scenario_.probe.alpha();
      const Vector coh = mode::coherent_vector(m, alpha_bar);
      const auto params = loss_squeezed_thermal_params(scenario_.probe.n_squeezed, delta);
      const Matrix st = mode::squeezed_thermal(m, params.rbar, params.nbar);
      const Matrix pre = tensor(space_, Matrix(coh * coh.adjoint()), st);
      return u_bs_ * pre * u_bs_.adjoint();
    }
    case NoiseKind::Kind::AdditiveGaussian: {
      // acts on mode 2 of the initial probe, before the probe beam splitter
      const int m = space_.mode_dim();
      const double r = (scenario_.probe.kind == ProbeKind::Noon) ? 0.0
                                                                 : scenario_.probe.squeezing();
      NoiseKind nk{NoiseKind::Kind::AdditiveGaussian, delta, r};
      if (probe == ProbeKind::Noon) {
        const DensityMatrix noisy = additive_gaussian(DensityMatrix{space_, rho_probe},
                                                      nk.sigma_x(), nk.sigma_p(), 2,
                                                      scenario_.gaussian_nodes);
        return noisy.matrix;
      }
      const Vector coh = mode::coherent_vector(m, scenario_.probe.alpha());
      Matrix sq_noisy;
      if (route == ChannelRoute::Analytic) {
        // matched spreads turn the squeezed vacuum into a squeezed thermal
        // state with occupation delta and unchanged squeezing
        sq_noisy = mode::squeezed_thermal(m, r, delta);
      } else {
        const Vector sq = mode::squeeze_unitary(m, r).col(0);
        sq_noisy = additive_gaussian_single_mode(Matrix(sq * sq.adjoint()), nk.sigma_x(),
                                                 nk.sigma_p(), scenario_.gaussian_nodes);
      }
      const Matrix pre = tensor(space_, Matrix(coh * coh.adjoint()), sq_noisy);
      return u_bs_ * pre * u_bs_.adjoint();
    }
  }
  throw ConfigError("unknown noise kind");
}

DensityMatrix ScenarioEngine::pre_encoding_state(double delta) const {
  return DensityMatrix{space_, build_rho0(delta)};
}

DensityMatrix ScenarioEngine::error_state(double delta, double theta) const {
  const Matrix phi = phase_shift(space_, theta + delta0_);
  Matrix out = u_bs_ * (phi * build_rho0(delta) * phi.adjoint()) * u_bs_.adjoint();
  return DensityMatrix{space_, std::move(out)};
}

PureState ScenarioEngine::ideal_output(double theta) const {
  const Matrix phi = phase_shift(space_, theta + delta0_);
  return PureState{space_, u_bs_ * (phi * probe_.amplitudes)};
}

std::shared_ptr<NoisyResponses> ScenarioEngine::build_responses(double delta,
                                                                int max_order) const {
  auto resp = std::make_shared<NoisyResponses>();
  resp->delta = delta;
  const Matrix rho0 = build_rho0(delta);
  resp->trace = rho0.trace().real();
  if ((rho0 - rho0.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw NumericalError("responses: noisy state lost Hermiticity");
  const auto top = dominant_eigenpair(DensityMatrix{space_, rho0});
  resp->lambda = top.lambda;
  resp->gap = top.gap;
  resp->degenerate = top.degenerate;
  resp->dominant =
      extract_response(Matrix(top.psi.amplitudes * top.psi.amplitudes.adjoint()));
  Matrix power = rho0;
  for (int n = 1; n <= max_order; ++n) {
    if (n > 1) power = Matrix(power * rho0);
    OrderResponse ord;
    ord.n = n;
    ord.z_a = extract_response(power);
    ord.z_i = power.trace().real();
    resp->orders.push_back(std::move(ord));
  }
  return resp;
}

std::shared_ptr<const NoisyResponses> ScenarioEngine::responses(double delta,
                                                                int max_order) const {
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(delta);
    if (it != cache_.end() && static_cast<int>(it->second->orders.size()) >= max_order)
      return it->second;
  }
  auto built = build_responses(delta, max_order);
  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto& slot = cache_[delta];
  if (!slot || static_cast<int>(slot->orders.size()) < max_order) slot = std::move(built);
  return slot;
}

void ScenarioEngine::prepare(std::span<const double> deltas, int max_order) const {
  parallel::parallel_for(deltas.size(), [&](std::size_t i) {
    responses(deltas[i], max_order);
  });
}

double ScenarioEngine::dominant_lambda(double delta) const {
  return responses(delta, 1)->lambda;
}

}  // namespace vpem
