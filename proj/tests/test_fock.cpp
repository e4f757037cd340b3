#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "vpem/fock.hpp"

using namespace vpem;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("make_space geometry and validation") {
  CHECK(make_space(5, 1e-10).dim == 36);
  CHECK(make_space(31, 1e-8).dim == 1024);
  CHECK(make_space(1, 1e-10).dim == 4);
  CHECK_THROWS_AS(make_space(0, 1e-10), ConfigError);
  CHECK_THROWS_AS(make_space(4, 0.0), ConfigError);
  CHECK_THROWS_AS(make_space(4, 0.5), ConfigError);
  const FockSpace s = make_space(3, 1e-10);
  CHECK(s.index(2, 1) == 9);
  CHECK(s.n1(9) == 2);
  CHECK(s.n2(9) == 1);
}

TEST_CASE("noon_state structure") {
  const FockSpace space = make_space(6, 1e-10);
  const PureState psi = noon_state(space, 5);
  int nonzero = 0;
  for (int i = 0; i < space.dim; ++i)
    if (std::abs(psi.amplitudes(i)) > 0) ++nonzero;
  CHECK(nonzero == 2);
  CHECK(std::abs(psi.amplitudes(space.index(5, 0))) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(std::abs(psi.amplitudes(space.index(0, 5))) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(psi.norm_deficit() == doctest::Approx(0.0).epsilon(1e-14));

  const PureState one = noon_state(space, 1);
  CHECK(std::abs(one.amplitudes(space.index(1, 0))) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK_THROWS_AS(noon_state(space, 7), ConfigError);
}

TEST_CASE("coherent_state amplitudes, mean photon number and tail") {
  const FockSpace space = make_space(31, 1e-8);
  const double nc = 2.5;
  const PureState psi = coherent_state(space, std::sqrt(nc));

  // independent tail oracle: Poisson mass above the cutoff
  long double term = std::exp(-(long double)nc);
  long double kept = 0.0L;
  for (int n = 0; n <= 31; ++n) {
    kept += term;
    term *= nc / (n + 1);
  }
  const double tail = static_cast<double>(1.0L - kept);
  CHECK(tail < 1e-10);
  CHECK(psi.norm_deficit() == doctest::Approx(tail).epsilon(1e-6));

  double mean = 0.0;
  for (int i = 0; i < space.dim; ++i)
    mean += (space.n1(i) + space.n2(i)) * std::norm(psi.amplitudes(i));
  CHECK(mean == doctest::Approx(nc).epsilon(1e-9));

  CHECK(coherent_state(space, 0.0).amplitudes(space.index(0, 0)).real() ==
        doctest::Approx(1.0));
  CHECK_THROWS_AS(coherent_state(make_space(2, 1e-10), 2.0), TruncationError);
}

TEST_CASE("squeezed_number_state conventions") {
  const FockSpace space = make_space(24, 1e-2);
  SUBCASE("r=0 k=0 is vacuum") {
    const PureState psi = squeezed_number_state(space, 0.0, 0);
    CHECK(std::abs(psi.amplitudes(space.index(0, 0)) - 1.0) < 1e-14);
  }
  SUBCASE("closed-form amplitudes of squeezed vacuum") {
    const double r = 0.8;
    const PureState psi = squeezed_number_state(space, r, 0);
    // c_{2m} = (-tanh r)^m sqrt((2m)!)/(2^m m!) / sqrt(cosh r)
    double factor = 1.0 / std::sqrt(std::cosh(r));
    for (int m = 0; m <= 5; ++m) {
      if (m > 0) factor *= -std::tanh(r) * std::sqrt((2.0 * m) * (2.0 * m - 1.0)) / (2.0 * m);
      CHECK(psi.amplitudes(space.index(0, 2 * m)).real() == doctest::Approx(factor).epsilon(1e-9));
      if (2 * m + 1 < space.mode_dim())
        CHECK(std::abs(psi.amplitudes(space.index(0, 2 * m + 1))) < 1e-14);
    }
  }
  SUBCASE("x quadrature variance is e^{-2r}/2") {
    const double r = 0.7;
    const int m = space.mode_dim();
    const Vector sq = mode::squeeze_unitary(m, r).col(0);
    const Matrix a = mode::annihilation(m);
    const Matrix x = (a + a.adjoint()) / std::numbers::sqrt2;
    const double var = sq.dot((x * (x * sq))).real();
    CHECK(var == doctest::Approx(std::exp(-2.0 * r) / 2.0).epsilon(1e-10));
  }
  SUBCASE("mean photon number sinh^2 r within the truncation budget") {
    const FockSpace big = make_space(60, 1e-2);
    const double nr = 2.5;
    const PureState psi = squeezed_number_state(big, std::asinh(std::sqrt(nr)), 0);
    double mean = 0.0;
    for (int i = 0; i < big.dim; ++i)
      mean += (big.n1(i) + big.n2(i)) * std::norm(psi.amplitudes(i));
    CHECK(mean == doctest::Approx(nr).epsilon(1e-6));
  }
  SUBCASE("squeezed number states stay orthonormal") {
    const double r = 0.6;
    const Matrix u = mode::squeeze_unitary(space.mode_dim(), r);
    for (int j = 0; j <= 3; ++j)
      for (int k = 0; k <= 3; ++k) {
        const Complex overlap = u.col(j).dot(u.col(k));
        CHECK(std::abs(overlap - (j == k ? 1.0 : 0.0)) < 1e-12);
      }
  }
  SUBCASE("unreachable squeezing is rejected") {
    CHECK_THROWS_AS(squeezed_number_state(make_space(6, 1e-6), 1.2, 0), TruncationError);
  }
}

TEST_CASE("beam splitter properties") {
  const FockSpace space = make_space(6, 1e-10);
  const Matrix u = beam_splitter(space);

  SUBCASE("vacuum invariance") {
    Vector vac = Vector::Zero(space.dim);
    vac(0) = 1.0;
    CHECK((u * vac - vac).norm() < 1e-12);
  }
  SUBCASE("commutes with total photon number") {
    Matrix total = Matrix::Zero(space.dim, space.dim);
    for (int i = 0; i < space.dim; ++i) total(i, i) = space.n1(i) + space.n2(i);
    CHECK((u * total - total * u).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("unitary on the subspace with total photon number <= cutoff") {
    const Matrix gram = u.adjoint() * u;
    for (int i = 0; i < space.dim; ++i)
      for (int j = 0; j < space.dim; ++j) {
        if (space.n1(i) + space.n2(i) > space.cutoff_per_mode) continue;
        if (space.n1(j) + space.n2(j) > space.cutoff_per_mode) continue;
        const double expected = (i == j) ? 1.0 : 0.0;
        CHECK(std::abs(gram(i, j) - expected) < 1e-10);
      }
  }
}

TEST_CASE("phase shift") {
  const FockSpace space = make_space(4, 1e-10);
  CHECK((phase_shift(space, 0.0) - Matrix::Identity(space.dim, space.dim)).cwiseAbs().maxCoeff() <
        1e-15);
  CHECK((phase_shift(space, 1.3) - phase_shift(space, 1.3 + 2 * pi)).cwiseAbs().maxCoeff() <
        1e-12);
  Vector v = Vector::Zero(space.dim);
  v(space.index(0, 1)) = 1.0;
  const Vector w = phase_shift(space, 0.7) * v;
  CHECK(std::abs(w(space.index(0, 1)) - std::exp(Complex{0, 0.7})) < 1e-14);
}

TEST_CASE("parity observable") {
  const FockSpace space = make_space(5, 1e-10);
  const Observable parity = parity_observable(space);
  CHECK(parity.is_involutory);
  parity.validate();
  CHECK((parity.matrix * parity.matrix - Matrix::Identity(space.dim, space.dim))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  for (int i = 0; i < space.dim; ++i) {
    const double v = parity.matrix(i, i).real();
    CHECK((v == 1.0 || v == -1.0));
  }
  Vector vac = Vector::Zero(space.dim);
  vac(0) = 1.0;
  CHECK(expectation(parity, PureState{space, vac}) == doctest::Approx(1.0));
}

TEST_CASE("expectation") {
  const FockSpace space = make_space(3, 1e-10);
  const Observable parity = parity_observable(space);
  const DensityMatrix vac = density_from(coherent_state(space, 0.0));
  CHECK(expectation(parity, vac) == doctest::Approx(1.0));
  Observable identity{space, Matrix::Identity(space.dim, space.dim), true};
  const DensityMatrix rho = density_from(coherent_state(space, 0.6));
  CHECK(expectation(identity, rho) == doctest::Approx(rho.matrix.trace().real()).epsilon(1e-14));
}

TEST_CASE("eig: spectrum, reconstruction, clipping") {
  const FockSpace space = make_space(3, 1e-10);
  SUBCASE("pure state spectrum") {
    const DensityMatrix rho = density_from(noon_state(space, 2));
    const EigenDecomposition dec = eig(rho);
    CHECK(dec.eigenvalues(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dec.eigenvalues(1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(dec.dominant_gap == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("eigenvalues sum to the trace; reconstruction") {
    Matrix m = Matrix::Random(space.dim, space.dim);
    m = (m * m.adjoint()).eval();
    m /= m.trace().real();
    const DensityMatrix rho{space, m};
    const EigenDecomposition dec = eig(rho);
    CHECK(dec.eigenvalues.sum() == doctest::Approx(1.0).epsilon(1e-10));
    Matrix rebuilt = Matrix::Zero(space.dim, space.dim);
    for (int k = 0; k < space.dim; ++k)
      rebuilt += dec.eigenvalues(k) * (dec.eigenvectors[k].amplitudes *
                                       dec.eigenvectors[k].amplitudes.adjoint());
    CHECK((rebuilt - m).cwiseAbs().maxCoeff() < 1e-9);
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) {
        const Complex overlap =
            dec.eigenvectors[j].amplitudes.dot(dec.eigenvectors[k].amplitudes);
        CHECK(std::abs(overlap - (j == k ? 1.0 : 0.0)) < 1e-10);
      }
  }
  SUBCASE("PSD violation is an error") {
    Matrix bad = Matrix::Identity(space.dim, space.dim) / (space.dim - 1.0);
    bad(0, 0) = -1.0 / (space.dim - 1.0);
    CHECK_THROWS_AS(eig(DensityMatrix{space, bad}), NumericalError);
  }
}

TEST_CASE("matrix_power_normalized") {
  const FockSpace space = make_space(3, 1e-10);
  Matrix m = Matrix::Random(space.dim, space.dim);
  m = (m * m.adjoint()).eval();
  m /= m.trace().real();
  const DensityMatrix rho{space, m};

  SUBCASE("n = 1 is the identity map") {
    const DensityMatrix same = matrix_power_normalized(rho, 1);
    CHECK((same.matrix - m).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("large n projects onto the dominant eigenvector") {
    const EigenDecomposition dec = eig(rho);
    if (dec.dominant_gap >= 0.1) {
      const DensityMatrix proj = matrix_power_normalized(rho, 50);
      const Vector top = dec.eigenvectors[0].amplitudes;
      const double fidelity = (top.adjoint() * proj.matrix * top).value().real();
      CHECK(fidelity > 1.0 - 1e-8);
    }
  }
}

TEST_CASE("calibrate_convention pins the sine response") {
  for (int n : {1, 2, 3, 5}) {
    const FockSpace space = make_space(n + 1, 1e-10);
    const double delta0 = calibrate_convention(space, n);
    const Matrix u = beam_splitter(space);
    const Observable parity = parity_observable(space);
    const PureState probe = noon_state(space, n);
    const auto response = [&](double theta) {
      return expectation(parity, PureState{space, u * (phase_shift(space, theta) *
                                                       probe.amplitudes)});
    };
    for (int j = 0; j < 17; ++j) {
      const double theta = -0.4 + 0.05 * j;
      CHECK(std::abs(response(theta + delta0) - std::sin(n * theta)) < 1e-10);
    }
    // slope N at the origin after calibration
    const double h = 1e-5;
    const double slope = (response(h + delta0) - response(-h + delta0)) / (2 * h);
    CHECK(slope == doctest::Approx(static_cast<double>(n)).epsilon(1e-7));
    // brute-force scan agrees with the returned offset
    double best = 0.0, best_err = 1e9;
    for (int k = 0; k < 4000; ++k) {
      const double cand = -pi / n + 2 * pi / n * k / 4000.0;
      double err = 0.0;
      for (int j = 0; j < 17; ++j) {
        const double theta = -0.4 + 0.05 * j;
        err = std::max(err, std::abs(response(theta + cand) - std::sin(n * theta)));
      }
      if (err < best_err) {
        best_err = err;
        best = cand;
      }
    }
    const double period = 2 * pi / n;
    double diff = std::fmod(std::abs(best - delta0), period);
    diff = std::min(diff, period - diff);
    CHECK(diff < 2e-3);
  }
}

TEST_CASE("tensor and mode lifting agree") {
  const FockSpace space = make_space(3, 1e-10);
  const int m = space.mode_dim();
  const Matrix op = Matrix::Random(m, m);
  Matrix rho = Matrix::Random(space.dim, space.dim);
  rho = (rho * rho.adjoint()).eval();
  rho /= rho.trace().real();
  for (int which : {1, 2}) {
    const Matrix lifted = lift_to_mode(space, op, which);
    const Matrix direct = lifted * rho * lifted.adjoint();
    const Matrix structured = conjugate_mode_op(space, rho, op, which);
    CHECK((direct - structured).cwiseAbs().maxCoeff() < 1e-12);
  }
  const Vector v1 = Vector::Random(m);
  const Vector v2 = Vector::Random(m);
  const Matrix t = tensor(space, Matrix(v1 * v1.adjoint()), Matrix(v2 * v2.adjoint()));
  const Vector tv = tensor(space, v1, v2);
  CHECK((t - tv * tv.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
}
