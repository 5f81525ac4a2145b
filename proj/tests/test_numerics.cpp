#include <catch_amalgamated.hpp>

#include "dobs/numerics.hpp"
#include "support/helpers.hpp"

using namespace dobs;

namespace {
const Tolerances tol;
}

TEST_CASE("spectrum of the identity flags the repeated eigenvalue") {
  const Spectrum s = spectrum(Matrix::Identity(2, 2), tol);
  REQUIRE(s.values.size() == 2);
  CHECK(std::abs(s.values[0] - 1.0) < 1e-12);
  CHECK(std::abs(s.values[1] - 1.0) < 1e-12);
  CHECK(s.repeated[0]);
  CHECK(s.repeated[1]);
}

TEST_CASE("spectrum of a rotation is +/- i, simple") {
  Matrix m(2, 2);
  m << 0, 1, -1, 0;
  const Spectrum s = spectrum(m, tol);
  CHECK(dobs::testing::contains_value({s.values[0], s.values[1]}, Complex(0, 1), 1e-12));
  CHECK(dobs::testing::contains_value({s.values[0], s.values[1]}, Complex(0, -1), 1e-12));
  CHECK(s.all_simple());
}

TEST_CASE("spectrum of an upper triangular matrix reads off the diagonal") {
  // Characteristic polynomial (2 - x)(0.5 - x); roots solved by hand.
  Matrix m(2, 2);
  m << 2, 1, 0, 0.5;
  const Spectrum s = spectrum(m, tol);
  CHECK(dobs::testing::contains_value({s.values[0], s.values[1]}, Complex(2, 0), 1e-12));
  CHECK(dobs::testing::contains_value({s.values[0], s.values[1]}, Complex(0.5, 0), 1e-12));
  CHECK(s.all_simple());
}

TEST_CASE("spectrum pairs left and right eigenvectors with their eigenvalue") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = dobs::testing::random_matrix(4, 4, rng);
    const Spectrum s = spectrum(m, tol);
    const double scale = m.cwiseAbs().maxCoeff();
    for (Eigen::Index j = 0; j < 4; ++j) {
      const ComplexVector right_residual =
          m.cast<Complex>() * s.right.col(j) - s.values[j] * s.right.col(j);
      const ComplexVector left_residual =
          m.transpose().cast<Complex>() * s.left.col(j) - s.values[j] * s.left.col(j);
      CHECK(right_residual.norm() <= 1e-9 * scale);
      CHECK(left_residual.norm() <= 1e-9 * scale);
      CHECK(std::abs(s.right.col(j).norm() - 1.0) < 1e-12);
      CHECK(std::abs(s.left.col(j).norm() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("spectrum rejects non-square input") {
  CHECK_THROWS_AS(spectrum(Matrix::Zero(2, 3), tol), std::invalid_argument);
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(spectrum(bad, tol), std::invalid_argument);
}

TEST_CASE("unstable eigenvalues") {
  CHECK(unstable_eigenvalues(0.5 * Matrix::Identity(3, 3), tol).empty());

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 2;
  d(1, 1) = 0.5;
  const auto u = unstable_eigenvalues(d, tol);
  REQUIRE(u.size() == 1);
  CHECK(std::abs(u[0] - 2.0) < 1e-12);

  Matrix jordan(2, 2);
  jordan << 1, 1, 0, 1;
  CHECK(unstable_eigenvalues(jordan, tol).size() == 2);  // multiplicity retained
}

TEST_CASE("rank with relative tolerance") {
  CHECK(rank_tol(Matrix::Zero(3, 3), tol) == 0);
  CHECK(rank_tol(Matrix::Identity(4, 4), tol) == 4);
  Matrix m(2, 2);
  m << 1, 2, 2, 4;  // second row twice the first
  CHECK(rank_tol(m, tol) == 1);
  CHECK(rank_tol(Matrix(0, 3), tol) == 0);
}

TEST_CASE("kronecker product basics") {
  CHECK(kron(Matrix::Identity(2, 2), Matrix::Identity(3, 3)).isApprox(Matrix::Identity(6, 6)));
  Matrix nil(2, 2);
  nil << 0, 1, 0, 0;
  Matrix scalar(1, 1);
  scalar << 2;
  Matrix expected(2, 2);
  expected << 0, 2, 0, 0;
  CHECK(kron(nil, scalar).isApprox(expected));
}

TEST_CASE("kronecker eigenvalues are the pairwise products") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = dobs::testing::random_matrix(2, 2, rng);
    const Matrix b = dobs::testing::random_matrix(2, 2, rng);
    const Spectrum sa = spectrum(a, tol);
    const Spectrum sb = spectrum(b, tol);
    const Spectrum sk = spectrum(kron(a, b), tol);
    std::vector<Complex> products;
    for (Eigen::Index i = 0; i < 2; ++i)
      for (Eigen::Index j = 0; j < 2; ++j) products.push_back(sa.values[i] * sb.values[j]);
    for (Eigen::Index i = 0; i < 4; ++i)
      CHECK(dobs::testing::contains_value(products, sk.values[i], 1e-7));
  }
}

TEST_CASE("spectral radius") {
  CHECK(spectral_radius(Matrix::Zero(3, 3)) == 0.0);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = -3;
  d(1, 1) = 1;
  CHECK(spectral_radius(d) == Catch::Approx(3.0));

  // Companion matrix of z^2 - z - 1; dominant root is the golden ratio.
  Matrix c(2, 2);
  c << 0, 1, 1, 1;
  CHECK(std::abs(spectral_radius(c) - 1.6180339887498949) < 1e-9);
}

TEST_CASE("eigenvalue sums and products match trace and determinant") {
  Rng rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    const Eigen::Index n = 2 + trial % 4;
    const Matrix m = dobs::testing::random_matrix(n, n, rng);
    const Spectrum s = spectrum(m, tol);
    Complex sum = 0, prod = 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      sum += s.values[i];
      prod *= s.values[i];
    }
    CHECK(std::abs(sum - m.trace()) <= 1e-8 * std::max(1.0, m.norm()));
    const double det = m.determinant();
    CHECK(std::abs(prod - det) <= 1e-6 * std::max(1.0, std::abs(det)));
  }
}

TEST_CASE("rank is invariant under transpose") {
  Rng rng(23);
  for (int trial = 0; trial < 25; ++trial) {
    Matrix m = dobs::testing::random_matrix(2 + trial % 3, 2 + (trial / 2) % 4, rng);
    if (trial % 3 == 0 && m.rows() > 1) m.row(1) = 2.0 * m.row(0);  // force deficiency sometimes
    CHECK(rank_tol(m, tol) == rank_tol(Matrix(m.transpose()), tol));
  }
}

TEST_CASE("kron is bilinear and respects the mixed product rule") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = dobs::testing::random_matrix(2, 3, rng);
    const Matrix b = dobs::testing::random_matrix(3, 2, rng);
    const Matrix c = dobs::testing::random_matrix(3, 2, rng);
    const Matrix d = dobs::testing::random_matrix(2, 3, rng);
    const double alpha = rng.uniform(-2, 2);

    CHECK((kron(alpha * a, b) - alpha * kron(a, b)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((kron(a, b + c) - (kron(a, b) + kron(a, c))).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((kron(a, b) * kron(b, d) - kron(a * b, b * d)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("spectral radius of powers") {
  Rng rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = dobs::testing::random_matrix(3, 3, rng);
    const double rho = spectral_radius(m);
    for (int k : {2, 3}) {
      Matrix power = m;
      for (int i = 1; i < k; ++i) power = power * m;
      CHECK(std::pow(spectral_radius(power), 1.0 / k) <= rho * (1 + 1e-6));
    }
  }
}

TEST_CASE("real embedding doubles the complex rank") {
  Rng rng(41);
  ComplexMatrix c(3, 2);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) c(i, j) = Complex(rng.gaussian(), rng.gaussian());
  CHECK(rank_tol(real_embedding(c), tol) == 4);
  c.col(1) = Complex(2, 1) * c.col(0);
  CHECK(rank_tol(real_embedding(c), tol) == 2);
}

TEST_CASE("tolerances validate") {
  Tolerances bad;
  bad.rank_rel_tol = 2.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = Tolerances{};
  bad.eig_sep_tol = -1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
