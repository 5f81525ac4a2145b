#pragma once

#include <algorithm>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dobs/rng.hpp"

namespace dobs {

using Matrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

// Numeric failures (non-convergence, impossible constructions) are thrown,
// never returned as NaN; every downstream verdict depends on clean spectra.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Tolerances {
  double rank_rel_tol = 1e-9;    // singular values below rank_rel_tol * sigma_max count as zero
  double eig_sep_tol = 1e-7;     // eigenvalues closer than this are treated as one cluster
  double zero_entry_tol = 1e-8;  // eigenvector entries below this count as structural zeros
  double stability_margin = 1e-6;

  void validate() const {
    if (rank_rel_tol <= 0 || rank_rel_tol >= 1) throw std::invalid_argument("rank_rel_tol must be in (0,1)");
    if (eig_sep_tol <= 0) throw std::invalid_argument("eig_sep_tol must be positive");
    if (zero_entry_tol <= 0) throw std::invalid_argument("zero_entry_tol must be positive");
    if (stability_margin <= 0) throw std::invalid_argument("stability_margin must be positive");
  }
};

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + ": entries must be finite");
}

inline void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) throw std::invalid_argument(std::string(what) + ": matrix must be square");
}

// Full eigen-structure of a square matrix: eigenvalues paired with unit-norm
// right eigenvectors (M v = lambda v) and left eigenvectors (w^T M = lambda w^T),
// plus a per-eigenvalue repeated/simple marker at eig_sep_tol resolution.
struct Spectrum {
  ComplexVector values;
  ComplexMatrix right;             // column j pairs with values[j]
  ComplexMatrix left;              // column j satisfies left.col(j)^T M = values[j] left.col(j)^T
  std::vector<bool> repeated;      // true iff another eigenvalue lies within eig_sep_tol

  bool all_simple() const {
    return std::none_of(repeated.begin(), repeated.end(), [](bool r) { return r; });
  }
};

namespace detail {

// Deterministic orthogonal matrix used for the one-shot similarity shuffle
// retry when the eigensolver reports non-convergence.
inline Matrix shuffle_orthogonal(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = rng.gaussian();
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ();
}

struct RawEig {
  ComplexVector values;
  ComplexMatrix vectors;
};

inline RawEig eig_with_retry(const Matrix& m, const char* what) {
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(m.cast<Complex>(), true);
  if (solver.info() == Eigen::Success) return {solver.eigenvalues(), solver.eigenvectors()};
  // One randomized restart: solve Q^T M Q and map the eigenvectors back.
  const Matrix q = shuffle_orthogonal(m.rows(), 0x5eedULL);
  Eigen::ComplexEigenSolver<ComplexMatrix> retry((q.transpose() * m * q).cast<Complex>(), true);
  if (retry.info() != Eigen::Success)
    throw Error(std::string(what) + ": eigen-decomposition failed to converge (after similarity restart)");
  return {retry.eigenvalues(), q.cast<Complex>() * retry.eigenvectors()};
}

inline ComplexVector eigvals_with_retry(const Matrix& m, const char* what) {
  Eigen::EigenSolver<Matrix> solver(m, false);
  if (solver.info() == Eigen::Success) return solver.eigenvalues();
  const Matrix q = shuffle_orthogonal(m.rows(), 0x5eedULL);
  Eigen::EigenSolver<Matrix> retry(q.transpose() * m * q, false);
  if (retry.info() != Eigen::Success)
    throw Error(std::string(what) + ": eigenvalue computation failed to converge (after similarity restart)");
  return retry.eigenvalues();
}

}  // namespace detail

inline Spectrum spectrum(const Matrix& m, const Tolerances& tol) {
  require_square(m, "spectrum");
  require_finite(m, "spectrum");
  tol.validate();
  const Eigen::Index n = m.rows();

  Spectrum s;
  if (n == 0) {
    s.values = ComplexVector(0);
    s.right = ComplexMatrix(0, 0);
    s.left = ComplexMatrix(0, 0);
    return s;
  }

  auto right = detail::eig_with_retry(m, "spectrum");
  auto left = detail::eig_with_retry(m.transpose(), "spectrum(left)");

  s.values = right.values;
  s.right = right.vectors;
  s.left = ComplexMatrix(n, n);

  // The transpose has the same eigenvalues; pair each right eigenvalue with
  // its closest unused counterpart to align the left eigenvectors.
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::Index best = -1;
    double best_dist = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (used[static_cast<std::size_t>(k)]) continue;
      const double d = std::abs(right.values[j] - left.values[k]);
      if (best < 0 || d < best_dist) {
        best = k;
        best_dist = d;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    s.left.col(j) = left.vectors.col(best);
  }

  for (Eigen::Index j = 0; j < n; ++j) {
    s.right.col(j).normalize();
    s.left.col(j).normalize();
  }

  s.repeated.assign(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (std::abs(s.values[i] - s.values[j]) < tol.eig_sep_tol) {
        s.repeated[static_cast<std::size_t>(i)] = true;
        s.repeated[static_cast<std::size_t>(j)] = true;
      }
  return s;
}

// Eigenvalues with modulus >= 1, duplicates retained per multiplicity.
inline std::vector<Complex> unstable_eigenvalues(const Matrix& m, const Tolerances& tol) {
  require_square(m, "unstable_eigenvalues");
  require_finite(m, "unstable_eigenvalues");
  tol.validate();
  std::vector<Complex> out;
  if (m.rows() == 0) return out;
  const ComplexVector values = detail::eigvals_with_retry(m, "unstable_eigenvalues");
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (std::abs(values[i]) >= 1.0) out.push_back(values[i]);
  return out;
}

// Numerical rank: singular values above rank_rel_tol * sigma_max.
inline Eigen::Index rank_tol(const Matrix& m, const Tolerances& tol) {
  require_finite(m, "rank_tol");
  tol.validate();
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sigma = svd.singularValues();
  const double cutoff = tol.rank_rel_tol * sigma[0];
  if (sigma[0] == 0.0) return 0;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma[i] > cutoff) ++r;
  return r;
}

template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  static_assert(std::is_same_v<typename DerivedA::Scalar, typename DerivedB::Scalar>,
                "kron factors must share a scalar type");
  Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(
      a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline double spectral_radius(const Matrix& m) {
  require_square(m, "spectral_radius");
  require_finite(m, "spectral_radius");
  if (m.rows() == 0) return 0.0;
  const ComplexVector values = detail::eigvals_with_retry(m, "spectral_radius");
  double rho = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) rho = std::max(rho, std::abs(values[i]));
  return rho;
}

// Real embedding [[Re, -Im], [Im, Re]]; its real rank is exactly twice the
// complex rank, which keeps all rank decisions on real SVDs.
inline Matrix real_embedding(const ComplexMatrix& m) {
  Matrix out(2 * m.rows(), 2 * m.cols());
  out.topLeftCorner(m.rows(), m.cols()) = m.real();
  out.topRightCorner(m.rows(), m.cols()) = -m.imag();
  out.bottomLeftCorner(m.rows(), m.cols()) = m.imag();
  out.bottomRightCorner(m.rows(), m.cols()) = m.real();
  return out;
}

// Representatives of eigenvalue clusters at eig_sep_tol resolution.
inline std::vector<Complex> cluster_values(const std::vector<Complex>& values, double sep_tol) {
  std::vector<Complex> reps;
  for (const Complex& v : values) {
    bool found = false;
    for (const Complex& r : reps)
      if (std::abs(v - r) < sep_tol) {
        found = true;
        break;
      }
    if (!found) reps.push_back(v);
  }
  return reps;
}

}  // namespace dobs
