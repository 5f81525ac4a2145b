#pragma once

#include <string>
#include <vector>

#include "dobs/numerics.hpp"
#include "dobs/plant.hpp"
#include "dobs/weights.hpp"

namespace dobs {

// Structural objects of the decentralized system acting on the stacked
// estimation errors: Abar = W (x) A, input block i injects into error block i
// only, output block i reads H_i from error block i only.
struct DecentralizedTriple {
  Matrix Abar;                      // mn x mn
  std::vector<Matrix> Bbar_blocks;  // block i: mn x n, identity embedding at block row i
  std::vector<Matrix> Hbar_blocks;  // block i: r_i x mn, H_i at block column i
};

inline DecentralizedTriple build_triple(const WeightMatrix& W, const Plant& p) {
  if (W.W.rows() != p.m())
    throw std::invalid_argument("build_triple: weight matrix size must match plant block count");
  const Eigen::Index n = p.n();
  const int m = p.m();
  DecentralizedTriple t;
  t.Abar = kron(W.W, p.A);
  for (int i = 0; i < m; ++i) {
    Matrix b = Matrix::Zero(m * n, n);
    b.middleRows(i * n, n) = Matrix::Identity(n, n);
    t.Bbar_blocks.push_back(std::move(b));
    Matrix h = Matrix::Zero(p.r(i + 1), m * n);
    h.middleCols(i * n, n) = p.H_blocks[static_cast<std::size_t>(i)];
    t.Hbar_blocks.push_back(std::move(h));
  }
  return t;
}

struct FixedModeViolation {
  Complex lambda;
  std::vector<int> subset;  // J, ascending vertex labels
  Eigen::Index achieved_rank = 0;
  Eigen::Index required_rank = 0;
};

struct FixedModeReport {
  std::vector<Complex> candidates;  // unstable eigenvalues with multiplicity
  std::vector<FixedModeViolation> violations;
  bool has_unstable_fixed_mode = false;
};

// Rank characterization of unstable fixed modes: lambda is fixed iff the
// bordered matrix [Abar - lambda I, B_J; H_Jc, 0] loses rank for some subset
// J of vertices. All 2^m subsets are enumerated; complex lambdas go through
// the real embedding with the required rank doubled.
inline FixedModeReport unstable_fixed_modes(const DecentralizedTriple& t, const Tolerances& tol) {
  tol.validate();
  const Eigen::Index nn = t.Abar.rows();
  const int m = static_cast<int>(t.Bbar_blocks.size());
  if (m > 16) throw std::invalid_argument("unstable_fixed_modes: more than 16 channels");

  FixedModeReport report;
  report.candidates = unstable_eigenvalues(t.Abar, tol);
  const std::vector<Complex> distinct = cluster_values(report.candidates, tol.eig_sep_tol);

  for (std::size_t li = 0; li < distinct.size(); ++li) {
    const Complex lambda = distinct[li];
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
      Eigen::Index b_cols = 0, h_rows = 0;
      for (int i = 0; i < m; ++i) {
        if (mask & (1u << i))
          b_cols += t.Bbar_blocks[static_cast<std::size_t>(i)].cols();
        else
          h_rows += t.Hbar_blocks[static_cast<std::size_t>(i)].rows();
      }
      ComplexMatrix bordered = ComplexMatrix::Zero(nn + h_rows, nn + b_cols);
      bordered.topLeftCorner(nn, nn) =
          t.Abar.cast<Complex>() - lambda * ComplexMatrix::Identity(nn, nn);
      Eigen::Index at = nn;
      for (int i = 0; i < m; ++i)
        if (mask & (1u << i)) {
          const Matrix& b = t.Bbar_blocks[static_cast<std::size_t>(i)];
          bordered.block(0, at, nn, b.cols()) = b.cast<Complex>();
          at += b.cols();
        }
      at = nn;
      for (int i = 0; i < m; ++i)
        if (!(mask & (1u << i))) {
          const Matrix& h = t.Hbar_blocks[static_cast<std::size_t>(i)];
          bordered.block(at, 0, h.rows(), nn) = h.cast<Complex>();
          at += h.rows();
        }
      const Eigen::Index rank2 = rank_tol(real_embedding(bordered), tol);
      if (rank2 < 2 * nn) {
        FixedModeViolation v;
        v.lambda = lambda;
        for (int i = 0; i < m; ++i)
          if (mask & (1u << i)) v.subset.push_back(i + 1);
        v.achieved_rank = rank2 / 2;
        v.required_rank = nn;
        report.violations.push_back(std::move(v));
      }
    }
  }
  report.has_unstable_fixed_mode = !report.violations.empty();
  return report;
}

// Randomized cross-check: eigenvalues that persist under many random
// block-diagonal static output feedbacks. Validation aid only; the rank test
// is the deciding procedure.
inline std::vector<Complex> fixed_mode_oracle(const DecentralizedTriple& t, int trials,
                                              std::uint64_t seed, const Tolerances& tol) {
  if (trials < 2) throw std::invalid_argument("fixed_mode_oracle: at least 2 trials required");
  Rng rng(seed);
  const int m = static_cast<int>(t.Bbar_blocks.size());

  std::vector<Complex> persistent;
  for (int trial = 0; trial < trials; ++trial) {
    Matrix closed = t.Abar;
    for (int i = 0; i < m; ++i) {
      const Matrix& b = t.Bbar_blocks[static_cast<std::size_t>(i)];
      const Matrix& h = t.Hbar_blocks[static_cast<std::size_t>(i)];
      Matrix gain(b.cols(), h.rows());
      for (Eigen::Index a = 0; a < gain.rows(); ++a)
        for (Eigen::Index c = 0; c < gain.cols(); ++c) gain(a, c) = rng.uniform(-1.0, 1.0);
      closed += b * gain * h;
    }
    const ComplexVector values = detail::eigvals_with_retry(closed, "fixed_mode_oracle");
    if (trial == 0) {
      persistent.assign(values.data(), values.data() + values.size());
      continue;
    }
    std::vector<Complex> kept;
    for (const Complex& candidate : persistent)
      for (Eigen::Index i = 0; i < values.size(); ++i)
        if (std::abs(candidate - values[i]) < tol.eig_sep_tol) {
          kept.push_back(candidate);
          break;
        }
    persistent = std::move(kept);
    if (persistent.empty()) break;
  }
  return persistent;
}

}  // namespace dobs
