#pragma once

#include <vector>

#include "dobs/graph.hpp"
#include "dobs/numerics.hpp"
#include "dobs/rng.hpp"

// Brute-force oracles used only by tests and verification campaigns. They
// deliberately share no code with the modules they check: everything here is
// built from numerics and graph primitives alone.

namespace dobs::oracles {

// Detectability via the unobservable subspace: kernel of the stacked powers
// [H; HA; ...; H A^(n-1)] must contain no eigenvector of an unstable
// eigenvalue.
inline bool oracle_detectability(const Matrix& A, const Matrix& H, const Tolerances& tol) {
  require_square(A, "oracle_detectability");
  const Eigen::Index n = A.rows();
  if (n > 5) throw std::invalid_argument("oracle_detectability: sized for n <= 5");

  Matrix stack(H.rows() * n, n);
  Matrix row = H;
  for (Eigen::Index k = 0; k < n; ++k) {
    stack.middleRows(k * H.rows(), H.rows()) = row;
    row = row * A;
  }

  const Spectrum s = spectrum(A, tol);
  const double scale = std::max(1.0, stack.size() ? stack.cwiseAbs().maxCoeff() : 0.0);
  for (Eigen::Index j = 0; j < s.values.size(); ++j) {
    if (std::abs(s.values[j]) < 1.0) continue;
    if (stack.rows() == 0) return false;  // nothing observed, unstable mode free
    const double residual = (stack.cast<Complex>() * s.right.col(j)).norm();
    if (residual < 1e-7 * scale) return false;
  }
  return true;
}

// Persistence oracle for fixed modes with Gaussian static gains (the main
// pipeline uses uniform gains; the distributions are kept distinct on
// purpose). Takes the structural blocks raw to avoid depending on the module
// under test.
inline std::vector<Complex> oracle_fixed_mode(const Matrix& Abar,
                                              const std::vector<Matrix>& Bbar_blocks,
                                              const std::vector<Matrix>& Hbar_blocks, int trials,
                                              std::uint64_t seed, const Tolerances& tol) {
  if (trials < 2) throw std::invalid_argument("oracle_fixed_mode: at least 2 trials required");
  Rng rng(seed);
  std::vector<Complex> persistent;
  for (int trial = 0; trial < trials; ++trial) {
    Matrix closed = Abar;
    for (std::size_t i = 0; i < Bbar_blocks.size(); ++i) {
      Matrix gain(Bbar_blocks[i].cols(), Hbar_blocks[i].rows());
      for (Eigen::Index a = 0; a < gain.rows(); ++a)
        for (Eigen::Index b = 0; b < gain.cols(); ++b) gain(a, b) = rng.gaussian();
      closed += Bbar_blocks[i] * gain * Hbar_blocks[i];
    }
    const ComplexVector values = detail::eigvals_with_retry(closed, "oracle_fixed_mode");
    if (trial == 0) {
      persistent.assign(values.data(), values.data() + values.size());
      continue;
    }
    std::vector<Complex> kept;
    for (const Complex& candidate : persistent)
      for (Eigen::Index k = 0; k < values.size(); ++k)
        if (std::abs(candidate - values[k]) < tol.eig_sep_tol) {
          kept.push_back(candidate);
          break;
        }
    persistent = std::move(kept);
    if (persistent.empty()) break;
  }
  return persistent;
}

// Pure random search for omniscience-achieving parameters: consistent
// row-stochastic weights plus random gains with full-order augmentation.
// A success is conclusive; a failure is only evidence.
inline bool oracle_omniscience_search(const Matrix& A, const std::vector<Matrix>& H_blocks,
                                      const DirectedGraph& g, long budget, std::uint64_t seed,
                                      const Tolerances& tol) {
  require_square(A, "oracle_omniscience_search");
  tol.validate();
  const Eigen::Index n = A.rows();
  const int m = g.m;
  if (static_cast<int>(H_blocks.size()) != m)
    throw std::invalid_argument("oracle_omniscience_search: output block count mismatch");
  if (n > 3 || m > 4) throw std::invalid_argument("oracle_omniscience_search: sized for n<=3, m<=4");

  const auto nbhd = neighborhoods(g);
  Rng rng(seed);
  const Eigen::Index mu = n;  // full-order augmentation per observer
  const Eigen::Index dim = m * n + m * mu;

  for (long trial = 0; trial < budget; ++trial) {
    // Row-stochastic weights supported on the neighborhoods.
    Matrix W = Matrix::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      double sum = 0;
      for (int j : nbhd[static_cast<std::size_t>(i)]) {
        const double w = rng.uniform(0.05, 1.0);
        W(i, j - 1) = w;
        sum += w;
      }
      W.row(i) /= sum;
    }

    auto random_fill = [&](Eigen::Index rows, Eigen::Index cols, double amp) {
      Matrix out(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = rng.uniform(-amp, amp);
      return out;
    };

    Matrix E = Matrix::Zero(dim, dim);
    E.topLeftCorner(m * n, m * n) = kron(W, A);
    for (int i = 0; i < m; ++i) {
      const Matrix& Hi = H_blocks[static_cast<std::size_t>(i)];
      const Matrix K = random_fill(n, Hi.rows(), 2.0);
      const Matrix P = random_fill(n, mu, 1.0);
      const Matrix Q = random_fill(mu, Hi.rows(), 1.0);
      const Matrix S = random_fill(mu, mu, 1.0);
      E.block(i * n, i * n, n, n) -= K * Hi;
      E.block(i * n, m * n + i * mu, n, mu) = -P;
      E.block(m * n + i * mu, i * n, mu, n) = Q * Hi;
      E.block(m * n + i * mu, m * n + i * mu, mu, mu) = S;
    }
    if (spectral_radius(E) < 1.0) return true;
  }
  return false;
}

}  // namespace dobs::oracles
