#include <doctest.h>

#include <cmath>
#include <vector>

#include "qkern/linalg.hpp"
#include "support.hpp"

using namespace qkern;
using namespace qkern::linalg;

TEST_CASE("matmul: identity and diagonal products") {
  Rng rng(11);
  const auto m = support::random_matrix(2, 2, rng);
  CHECK(max_abs_diff(ComplexMatrix::identity(2) * m, m) == 0.0);

  const std::vector<double> a{2, 3}, b{5, 7}, ab{10, 21};
  CHECK(max_abs_diff(ComplexMatrix::diagonal(a) * ComplexMatrix::diagonal(b), ComplexMatrix::diagonal(ab)) == 0.0);
}

TEST_CASE("matmul agrees with a naive triple loop") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = support::random_matrix(4, 4, rng);
    const auto b = support::random_matrix(4, 4, rng);
    CHECK(support::max_diff(a * b, support::naive_matmul(a, b)) < 1e-12);
  }
  const auto a = support::random_matrix(3, 5, rng);
  const auto b = support::random_matrix(5, 2, rng);
  CHECK(support::max_diff(a * b, support::naive_matmul(a, b)) < 1e-12);
  CHECK_THROWS_AS(matmul(a, a), DimensionError);
}

TEST_CASE("tensor: basis bookkeeping and cap") {
  CHECK(max_abs_diff(tensor(ComplexMatrix::identity(2), ComplexMatrix::identity(2)), ComplexMatrix::identity(4)) == 0.0);

  const std::vector<double> p0{1, 0}, p1{0, 1};
  const auto t = tensor(ComplexMatrix::diagonal(p0), ComplexMatrix::diagonal(p1));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(t(i, j) == Complex(i == 1 && j == 1 ? 1.0 : 0.0));

  CHECK_THROWS_AS(tensor(ComplexMatrix::identity(8), ComplexMatrix::identity(8)), DimensionError);
}

TEST_CASE("tensor: mixed-product property on random inputs") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = support::random_matrix(2, 2, rng), b = support::random_matrix(2, 2, rng);
    const auto c = support::random_matrix(2, 2, rng), d = support::random_matrix(2, 2, rng);
    CHECK(max_abs_diff(tensor(a, b) * tensor(c, d), tensor(a * c, b * d)) < 1e-12);
  }
}

TEST_CASE("hermitian_eig: known spectra") {
  const std::vector<double> d{1, 2, 3};
  const auto e = hermitian_eig(ComplexMatrix::diagonal(d));
  CHECK(e.eigenvalues == std::vector<double>{1, 2, 3});
  CHECK(max_abs_diff(e.eigenvectors, ComplexMatrix::identity(3)) < 1e-15);

  const ComplexMatrix x{{0.0, 1.0}, {1.0, 0.0}};
  const auto ex = hermitian_eig(x);
  CHECK(ex.eigenvalues[0] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(ex.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));

  const ComplexMatrix y{{0.0, Complex(0, -1)}, {Complex(0, 1), 0.0}};
  const auto ey = hermitian_eig(y);
  CHECK(ey.eigenvalues[0] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(ey.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("hermitian_eig: reconstruction and orthonormality on random Hermitian matrices") {
  Rng rng(14);
  for (std::size_t n : {2u, 3u, 4u, 8u, 16u, 32u}) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto m = support::random_hermitian(n, rng);
      const auto e = hermitian_eig(m);
      const auto& v = e.eigenvectors;
      const auto rebuilt = v * ComplexMatrix::diagonal(e.eigenvalues) * support::naive_adjoint(v);
      CHECK(support::max_diff(rebuilt, m) < 1e-10);
      CHECK(support::max_diff(support::naive_adjoint(v) * v, ComplexMatrix::identity(n)) < 1e-10);
      for (std::size_t i = 1; i < n; ++i) CHECK(e.eigenvalues[i - 1] <= e.eigenvalues[i]);
      double tr = 0.0, sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) tr += m(i, i).real();
      for (double l : e.eigenvalues) sum += l;
      CHECK(sum == doctest::Approx(tr).epsilon(1e-10));
    }
  }
}

TEST_CASE("hermitian_eig: degenerate spectrum and rejection of non-Hermitian input") {
  Rng rng(15);
  const auto u = support::random_matrix(4, 4, rng);
  // Repeated eigenvalue 2 with multiplicity three.
  const std::vector<double> d{2, 2, 2, -1};
  const auto e = hermitian_eig(ComplexMatrix::diagonal(d));
  CHECK(e.eigenvalues[0] == doctest::Approx(-1.0));
  CHECK(e.eigenvalues[3] == doctest::Approx(2.0));
  CHECK_THROWS_AS(hermitian_eig(u), NumericalError);
}

TEST_CASE("sqrt_psd") {
  const std::vector<double> d{4, 9}, r{2, 3};
  CHECK(max_abs_diff(sqrt_psd(ComplexMatrix::diagonal(d)), ComplexMatrix::diagonal(r)) < 1e-14);
  CHECK(max_abs_diff(sqrt_psd(ComplexMatrix::identity(3)), ComplexMatrix::identity(3)) < 1e-14);

  Rng rng(16);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = support::random_matrix(4, 4, rng);
    const auto psd = g * support::naive_adjoint(g);
    const auto s = sqrt_psd(psd);
    CHECK(support::max_diff(support::naive_matmul(s, s), psd) < 1e-9);
  }
  const std::vector<double> neg{1.0, -0.5};
  CHECK_THROWS_AS(sqrt_psd(ComplexMatrix::diagonal(neg)), NumericalError);
  const std::vector<double> tiny{1.0, -1e-12};
  CHECK(sqrt_psd(ComplexMatrix::diagonal(tiny))(1, 1) == Complex(0.0));
}

TEST_CASE("partial_trace") {
  Rng rng(17);
  const auto rho = qhmm::random_density(2, rng);
  const auto sigma = qhmm::random_density(3, rng);
  const auto prod = tensor(rho.matrix(), sigma.matrix());
  CHECK(max_abs_diff(partial_trace(prod, 2, 3, Subsystem::A), rho.matrix()) < 1e-12);
  CHECK(max_abs_diff(partial_trace(prod, 2, 3, Subsystem::B), sigma.matrix()) < 1e-12);

  const double h = 1.0 / std::sqrt(2.0);
  const std::vector<Complex> bell{h, 0, 0, h};
  const auto rb = partial_trace(ComplexMatrix::outer(bell), 2, 2, Subsystem::A);
  CHECK(max_abs_diff(rb, ComplexMatrix::identity(2) * Complex(0.5)) < 1e-15);

  for (int trial = 0; trial < 20; ++trial) {
    const auto r = qhmm::random_density(4, rng);
    CHECK(std::abs(trace(partial_trace(r.matrix(), 2, 2, Subsystem::A)) - 1.0) < 1e-12);
    CHECK(std::abs(trace(partial_trace(r.matrix(), 2, 2, Subsystem::B)) - 1.0) < 1e-12);
  }
  CHECK_THROWS_AS(partial_trace(ComplexMatrix::identity(4), 3, 2, Subsystem::A), DimensionError);
}

TEST_CASE("frobenius_norm, trace, adjoint") {
  CHECK(frobenius_norm(ComplexMatrix::identity(2)) == doctest::Approx(std::sqrt(2.0)));
  const std::vector<double> d{1, 2};
  CHECK(trace(ComplexMatrix::diagonal(d)) == Complex(3.0));

  Rng rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = support::random_matrix(3, 4, rng);
    CHECK(support::max_diff(adjoint(m), support::naive_adjoint(m)) == 0.0);
    const double f = frobenius_norm(m);
    CHECK(f * f == doctest::Approx(trace(adjoint(m) * m).real()).epsilon(1e-12));
  }
}
