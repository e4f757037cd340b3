#include "vpem/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace vpem {

namespace {

constexpr Complex kI{0.0, 1.0};

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

FockSpace make_space(int cutoff_per_mode, double trace_tolerance) {
  require(cutoff_per_mode >= 1, "make_space: cutoff_per_mode must be >= 1");
  require(trace_tolerance > 0.0 && trace_tolerance <= 1e-2,
          "make_space: trace_tolerance must be in (0, 1e-2]");
  FockSpace space;
  space.cutoff_per_mode = cutoff_per_mode;
  space.dim = (cutoff_per_mode + 1) * (cutoff_per_mode + 1);
  space.trace_tolerance = trace_tolerance;
  return space;
}

double PureState::norm_deficit() const { return 1.0 - amplitudes.squaredNorm(); }

void PureState::validate() const {
  if (amplitudes.size() != space.dim)
    throw NumericalError("PureState: amplitude vector does not match space dimension");
  const double deficit = norm_deficit();
  if (deficit > space.trace_tolerance || deficit < -1e-12) {
    std::ostringstream msg;
    msg << "PureState: norm deficit " << deficit << " exceeds tolerance "
        << space.trace_tolerance;
    throw TruncationError(msg.str());
  }
}

double DensityMatrix::trace_deficit() const { return 1.0 - matrix.trace().real(); }

void DensityMatrix::validate() const {
  if (matrix.rows() != space.dim || matrix.cols() != space.dim)
    throw NumericalError("DensityMatrix: matrix does not match space dimension");
  const double herm = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
  if (herm > tol::hermitian)
    throw NumericalError("DensityMatrix: Hermiticity violated beyond 1e-12");
  const double deficit = trace_deficit();
  if (deficit > space.trace_tolerance || deficit < -1e-12) {
    std::ostringstream msg;
    msg << "DensityMatrix: trace deficit " << deficit << " outside [ -1e-12, "
        << space.trace_tolerance << " ]";
    throw TruncationError(msg.str());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(matrix, Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) < -tol::psd)
    throw NumericalError("DensityMatrix: negative eigenvalue beyond PSD tolerance");
}

void Observable::validate() const {
  const double herm = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
  if (herm > tol::hermitian) throw NumericalError("Observable: not Hermitian");
  if (is_involutory) {
    Matrix sq = matrix * matrix;
    sq -= Matrix::Identity(matrix.rows(), matrix.cols());
    if (sq.cwiseAbs().maxCoeff() > tol::hermitian)
      throw NumericalError("Observable: marked involutory but A^2 != I");
  }
}

// ---- single-mode building blocks -------------------------------------------

namespace mode {

Matrix annihilation(int dim) {
  Matrix a = Matrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Matrix number(int dim) {
  Matrix n = Matrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

Vector fock_vector(int dim, int n) {
  require(n >= 0 && n < dim, "fock_vector: level outside truncated space");
  Vector v = Vector::Zero(dim);
  v(n) = 1.0;
  return v;
}

Vector coherent_vector(int dim, Complex alpha) {
  Vector v(dim);
  v(0) = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n < dim; ++n) v(n) = v(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  return v;
}

Matrix squeeze_unitary(int dim, double r) {
  const Matrix a = annihilation(dim);
  const Matrix a2 = a * a;
  // Generator r(a^2 - a'^2)/2 is anti-Hermitian; exponentiate as exp(iH)
  // with H = -i * generator.
  const Matrix h = -kI * (0.5 * r) * (a2 - a2.adjoint());
  return exp_i_hermitian(h);
}

Matrix displacement_unitary(int dim, Complex beta) {
  const Matrix a = annihilation(dim);
  const Matrix gen = beta * a.adjoint() - std::conj(beta) * a;
  return exp_i_hermitian(-kI * gen);
}

Matrix squeezed_thermal(int dim, double r, double nbar, double weight_tol) {
  const Matrix squeeze = squeeze_unitary(dim, r);
  Matrix rho = Matrix::Zero(dim, dim);
  double cumulative = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double weight =
        (nbar == 0.0) ? (k == 0 ? 1.0 : 0.0)
                      : std::pow(nbar / (nbar + 1.0), k) / (nbar + 1.0);
    const Vector sk = squeeze.col(k);  // squeeze * |k>
    rho.noalias() += weight * (sk * sk.adjoint());
    cumulative += weight;
    if (cumulative >= 1.0 - weight_tol) return rho;
  }
  throw NumericalError("squeezed_thermal: weight series not converged within cutoff terms");
}

}  // namespace mode

// ---- two-mode assembly ------------------------------------------------------

Matrix lift_to_mode(const FockSpace& space, const Matrix& op, int which_mode) {
  const int m = space.mode_dim();
  require(op.rows() == m && op.cols() == m, "lift_to_mode: operator has wrong dimension");
  require(which_mode == 1 || which_mode == 2, "lift_to_mode: mode must be 1 or 2");
  Matrix out = Matrix::Zero(space.dim, space.dim);
  if (which_mode == 1) {
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        if (op(a, b) != Complex{0.0, 0.0})
          for (int k = 0; k < m; ++k) out(space.index(a, k), space.index(b, k)) = op(a, b);
  } else {
    for (int a = 0; a < m; ++a)
      out.block(a * m, a * m, m, m) = op;
    // off-diagonal mode-1 blocks stay zero (identity on mode 1)
  }
  return out;
}

Vector tensor(const FockSpace& space, const Vector& mode1, const Vector& mode2) {
  const int m = space.mode_dim();
  require(mode1.size() == m && mode2.size() == m, "tensor: factor dimensions must equal mode_dim");
  Vector out(space.dim);
  for (int a = 0; a < m; ++a) out.segment(a * m, m) = mode1(a) * mode2;
  return out;
}

Matrix tensor(const FockSpace& space, const Matrix& mode1, const Matrix& mode2) {
  const int m = space.mode_dim();
  require(mode1.rows() == m && mode2.rows() == m, "tensor: factor dimensions must equal mode_dim");
  Matrix out(space.dim, space.dim);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) out.block(a * m, b * m, m, m) = mode1(a, b) * mode2;
  return out;
}

Matrix conjugate_mode_op(const FockSpace& space, const Matrix& rho, const Matrix& op,
                         int which_mode) {
  const int m = space.mode_dim();
  require(op.rows() == m && op.cols() == m, "conjugate_mode_op: operator has wrong dimension");
  Matrix out(space.dim, space.dim);
  if (which_mode == 2) {
    Matrix tmp(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        tmp.noalias() = op * rho.block(a * m, b * m, m, m);
        out.block(a * m, b * m, m, m).noalias() = tmp * op.adjoint();
      }
  } else {
    const auto all = Eigen::all;
    Matrix tmp(space.dim, space.dim);
    for (int n2 = 0; n2 < m; ++n2) {
      const auto rows = Eigen::seqN(n2, m, m);
      tmp(rows, all) = op * rho(rows, all);
    }
    for (int m2 = 0; m2 < m; ++m2) {
      const auto cols = Eigen::seqN(m2, m, m);
      out(all, cols) = tmp(all, cols) * op.adjoint();
    }
  }
  return out;
}

DensityMatrix density_from(const PureState& psi) {
  return DensityMatrix{psi.space, psi.amplitudes * psi.amplitudes.adjoint()};
}

Matrix exp_i_hermitian(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("exp_i_hermitian: eigensolver failed");
  Vector phases(h.rows());
  for (Eigen::Index k = 0; k < h.rows(); ++k)
    phases(k) = std::exp(kI * es.eigenvalues()(k));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// ---- operations ---------------------------------------------------------------

PureState noon_state(const FockSpace& space, int n) {
  require(n >= 1, "noon_state: N must be >= 1");
  if (n > space.cutoff_per_mode)
    throw ConfigError("noon_state: N exceeds the per-mode cutoff");
  Vector amps = Vector::Zero(space.dim);
  const double w = 1.0 / std::numbers::sqrt2;
  amps(space.index(n, 0)) = w;
  amps(space.index(0, n)) = w;
  return PureState{space, std::move(amps)};
}

PureState coherent_state(const FockSpace& space, Complex alpha) {
  const Vector c = mode::coherent_vector(space.mode_dim(), alpha);
  PureState psi{space, tensor(space, c, mode::fock_vector(space.mode_dim(), 0))};
  const double deficit = psi.norm_deficit();
  if (deficit > space.trace_tolerance) {
    std::ostringstream msg;
    msg << "coherent_state: truncation deficit " << deficit << " exceeds tolerance "
        << space.trace_tolerance << " (|alpha|^2 = " << std::norm(alpha) << ")";
    throw TruncationError(msg.str());
  }
  return psi;
}

namespace {

// The generator-truncated squeeze is exactly unitary, so the lost weight shows
// up as amplitude distortion near the cutoff rather than a norm deficit.
// Estimate it by rebuilding on a padded space and comparing.
double squeeze_truncation_estimate(int dim, double r, int k) {
  const int big = dim + 16;
  const Vector ref = mode::squeeze_unitary(big, r).col(k);
  const Vector small = mode::squeeze_unitary(dim, r).col(k);
  double tail = ref.segment(dim, big - dim).squaredNorm();
  double diff = (ref.head(dim) - small).squaredNorm();
  return tail + diff;
}

}  // namespace

PureState squeezed_number_state(const FockSpace& space, double r, int k) {
  require(k >= 0, "squeezed_number_state: k must be >= 0");
  if (k > space.cutoff_per_mode)
    throw ConfigError("squeezed_number_state: k exceeds the per-mode cutoff");
  const int m = space.mode_dim();
  const double deficit = squeeze_truncation_estimate(m, r, k);
  if (deficit > space.trace_tolerance) {
    std::ostringstream msg;
    msg << "squeezed_number_state: truncation deficit ~" << deficit
        << " exceeds tolerance " << space.trace_tolerance << " (r = " << r << ", k = " << k
        << ", cutoff = " << space.cutoff_per_mode << ")";
    throw TruncationError(msg.str());
  }
  const Vector sq = mode::squeeze_unitary(m, r).col(k);
  return PureState{space, tensor(space, mode::fock_vector(m, 0), sq)};
}

Matrix beam_splitter(const FockSpace& space) {
  // The generator a1'a2 + a1a2' conserves n1+n2; exponentiate sector by
  // sector instead of diagonalizing the full dim x dim matrix.
  const int c = space.cutoff_per_mode;
  Matrix u = Matrix::Zero(space.dim, space.dim);
  for (int s = 0; s <= 2 * c; ++s) {
    const int lo = std::max(0, s - c);
    const int hi = std::min(s, c);
    const int size = hi - lo + 1;
    RealMatrix h = RealMatrix::Zero(size, size);
    for (int i = 0; i + 1 < size; ++i) {
      const int n1 = lo + i;         // couples (n1, s-n1) <-> (n1+1, s-n1-1)
      const int n2 = s - n1;
      h(i, i + 1) = h(i + 1, i) = std::sqrt(static_cast<double>((n1 + 1) * n2));
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(h);
    Vector phases(size);
    for (int i = 0; i < size; ++i)
      phases(i) = std::exp(kI * (std::numbers::pi / 4.0) * es.eigenvalues()(i));
    const Matrix block = es.eigenvectors().cast<Complex>() * phases.asDiagonal() *
                         es.eigenvectors().transpose().cast<Complex>();
    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j)
        u(space.index(lo + i, s - lo - i), space.index(lo + j, s - lo - j)) = block(i, j);
  }
  return u;
}

Matrix phase_shift(const FockSpace& space, double theta) {
  Matrix u = Matrix::Zero(space.dim, space.dim);
  for (int i = 0; i < space.dim; ++i) u(i, i) = std::exp(kI * (theta * space.n2(i)));
  return u;
}

Observable parity_observable(const FockSpace& space) {
  Matrix a = Matrix::Zero(space.dim, space.dim);
  for (int i = 0; i < space.dim; ++i) a(i, i) = (space.n1(i) % 2 == 0) ? 1.0 : -1.0;
  return Observable{space, std::move(a), /*is_involutory=*/true};
}

double expectation(const Observable& obs, const DensityMatrix& rho) {
  if (obs.space != rho.space) throw ConfigError("expectation: mismatched spaces");
  const Complex tr = obs.matrix.transpose().cwiseProduct(rho.matrix).sum();
  if (std::abs(tr.imag()) > tol::imag_residue)
    throw NumericalError("expectation: imaginary residue exceeds 1e-10");
  return tr.real();
}

double expectation(const Observable& obs, const PureState& psi) {
  if (obs.space != psi.space) throw ConfigError("expectation: mismatched spaces");
  const Complex val = psi.amplitudes.dot(obs.matrix * psi.amplitudes);
  if (std::abs(val.imag()) > tol::imag_residue)
    throw NumericalError("expectation: imaginary residue exceeds 1e-10");
  return val.real();
}

EigenDecomposition eig(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho.matrix + rho.matrix.adjoint()));
  if (es.info() != Eigen::Success) throw NumericalError("eig: eigensolver failed");
  const int dim = rho.space.dim;
  EigenDecomposition out;
  out.space = rho.space;
  out.eigenvalues.resize(dim);
  out.eigenvectors.reserve(dim);
  for (int k = 0; k < dim; ++k) {
    const int src = dim - 1 - k;  // ascending -> descending
    double ev = es.eigenvalues()(src);
    if (ev < -tol::psd) throw NumericalError("eig: PSD violation (eigenvalue < -1e-10)");
    out.eigenvalues(k) = std::max(ev, 0.0);
    out.eigenvectors.push_back(PureState{rho.space, es.eigenvectors().col(src)});
  }
  out.dominant_gap = out.eigenvalues(0) - out.eigenvalues(1);
  out.degenerate_dominant = out.dominant_gap < tol::degenerate_gap;
  return out;
}

DensityMatrix matrix_power_normalized(const DensityMatrix& rho, int n) {
  require(n >= 1, "matrix_power_normalized: order must be >= 1");
  const EigenDecomposition dec = eig(rho);
  const int dim = rho.space.dim;
  RealVector powered(dim);
  for (int k = 0; k < dim; ++k) powered(k) = std::pow(dec.eigenvalues(k), n);
  const double tr = powered.sum();
  if (tr <= tol::trace_power_floor)
    throw NumericalError("matrix_power_normalized: Tr[rho^n] vanishes");
  Matrix v(dim, dim);
  for (int k = 0; k < dim; ++k) v.col(k) = dec.eigenvectors[k].amplitudes;
  Matrix out = v * (powered / tr).asDiagonal() * v.adjoint();
  out = 0.5 * (out + out.adjoint());
  return DensityMatrix{rho.space, std::move(out)};
}

double calibrate_convention(const FockSpace& space, int n) {
  const PureState probe = noon_state(space, n);
  const Matrix u_bs = beam_splitter(space);
  const Observable parity = parity_observable(space);
  const auto response = [&](double theta) {
    const Vector psi = u_bs * (phase_shift(space, theta) * probe.amplitudes);
    return expectation(parity, PureState{space, psi});
  };
  // The ideal response is exactly a unit cosine in N*theta; recover its phase
  // from two samples a quarter period apart.
  const double f0 = response(0.0);
  const double f1 = response(std::numbers::pi / (2.0 * n));
  const double amp = std::hypot(f0, f1);
  if (std::abs(amp - 1.0) > tol::unitary)
    throw ConventionError("calibrate_convention: N00N response amplitude differs from 1");
  const double chi = std::atan2(-f1, f0);
  const double period = 2.0 * std::numbers::pi / n;
  double delta0 = (-std::numbers::pi / 2.0 - chi) / n;
  delta0 -= period * std::floor(delta0 / period + 0.5);  // reduce to (-pi/N, pi/N]
  for (int j = 0; j < 17; ++j) {
    const double theta = -0.4 + 0.05 * j;
    if (std::abs(response(theta + delta0) - std::sin(n * theta)) > tol::unitary)
      throw ConventionError("calibrate_convention: no offset reproduces the sine response");
  }
  return delta0;
}

}  // namespace vpem
