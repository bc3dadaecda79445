#include <doctest.h>

#include <cmath>
#include <complex>

#include "stoqlab/linalg.hpp"
#include "stoqlab/rng.hpp"

using namespace stoqlab;
using linalg::CMatrix;
using linalg::Complex;

namespace {

CMatrix random_matrix(std::size_t n, RngStream& rng, double scale = 1.0) {
  CMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      m.at(i, j) = {scale * (2.0 * rng.next_uniform() - 1.0),
                    scale * (2.0 * rng.next_uniform() - 1.0)};
    }
  }
  return m;
}

CMatrix hermitian(const CMatrix& m) {
  CMatrix h = m + m.adjoint();
  return h.scaled(0.5);
}

}  // namespace

TEST_CASE("lu solve inverts well-conditioned systems") {
  RngStream rng(1);
  const CMatrix a = random_matrix(12, rng) + CMatrix::identity(12).scaled(4.0);
  const CMatrix x = random_matrix(12, rng);
  const CMatrix b = a * x;
  const CMatrix solved = linalg::lu_solve(a, b);
  CHECK((solved - x).max_abs() <= 1e-10);
}

TEST_CASE("expm matches the 2x2 closed form") {
  // exp(t X) for the flip generator: cosh/sinh
  const double t = 0.8;
  CMatrix x(2);
  x.at(0, 1) = t;
  x.at(1, 0) = t;
  const CMatrix e = linalg::expm(x);
  CHECK(std::abs(e.at(0, 0) - Complex{std::cosh(t), 0.0}) <= 1e-14);
  CHECK(std::abs(e.at(0, 1) - Complex{std::sinh(t), 0.0}) <= 1e-14);

  // semigroup property on a random Hermitian generator
  RngStream rng(2);
  const CMatrix h = hermitian(random_matrix(8, rng));
  const CMatrix e1 = linalg::expm(h.scaled(0.3));
  const CMatrix e2 = linalg::expm(h.scaled(0.7));
  const CMatrix e3 = linalg::expm(h.scaled(1.0));
  CHECK((e1 * e2 - e3).max_abs() <= 1e-12);

  // oracle route: eigendecomposition exponential
  std::vector<double> values;
  CMatrix q;
  linalg::hermitian_eigensystem(h, values, q);
  CMatrix viaeig(8);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) {
      Complex acc{};
      for (std::size_t m = 0; m < 8; ++m)
        acc += q.at(i, m) * std::exp(values[m]) * std::conj(q.at(j, m));
      viaeig.at(i, j) = acc;
    }
  CHECK((linalg::expm(h) - viaeig).max_abs() <= 1e-11);
}

TEST_CASE("hermitian eigenvalues") {
  CMatrix pauli_x(2);
  pauli_x.at(0, 1) = 1.0;
  pauli_x.at(1, 0) = 1.0;
  const auto eig = linalg::hermitian_eigenvalues(pauli_x);
  CHECK(eig[0] == doctest::Approx(-1.0));
  CHECK(eig[1] == doctest::Approx(+1.0));

  RngStream rng(3);
  const CMatrix h = hermitian(random_matrix(10, rng));
  const auto values = linalg::hermitian_eigenvalues(h);
  // trace and Frobenius norm are eigenvalue invariants
  double trace = 0.0, frob = 0.0;
  for (std::size_t i = 0; i < 10; ++i) {
    trace += h.at(i, i).real();
    for (std::size_t j = 0; j < 10; ++j) frob += std::norm(h.at(i, j));
  }
  double sum = 0.0, sq = 0.0;
  for (double v : values) {
    sum += v;
    sq += v * v;
  }
  CHECK(sum == doctest::Approx(trace).epsilon(1e-10));
  CHECK(sq == doctest::Approx(frob).epsilon(1e-10));
}

TEST_CASE("rank") {
  CMatrix m(3);
  m.at(0, 0) = 1.0;
  m.at(1, 1) = 2.0;
  CHECK(linalg::rank(m) == 2);
  CHECK(linalg::rank(CMatrix::identity(5)) == 5);
  CHECK(linalg::rank(CMatrix(4)) == 0);
}

TEST_CASE("parallel product equals the serial reference") {
  RngStream rng(4);
  const CMatrix a = random_matrix(96, rng);
  const CMatrix b = random_matrix(96, rng);
  const CMatrix p = a * b;
  const CMatrix s = linalg::multiply_serial(a, b);
  CHECK((p - s).max_abs() == 0.0);
}
