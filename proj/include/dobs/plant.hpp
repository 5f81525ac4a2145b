#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dobs/graph.hpp"
#include "dobs/numerics.hpp"

namespace dobs {

// Discrete-time LTI plant x(k+1) = A x(k) (+ sum_i B_i u_i(k)) with the
// output split into per-observer blocks y_i(k) = H_i x(k).
struct Plant {
  Matrix A;
  std::vector<Matrix> H_blocks;                 // block i: r_i x n
  std::optional<std::vector<Matrix>> B_blocks;  // block i: n x p_i

  Eigen::Index n() const { return A.rows(); }
  int m() const { return static_cast<int>(H_blocks.size()); }
  Eigen::Index r(int i) const { return H_blocks[static_cast<std::size_t>(i - 1)].rows(); }
  Eigen::Index p(int i) const {
    return B_blocks ? (*B_blocks)[static_cast<std::size_t>(i - 1)].cols() : 0;
  }
  Eigen::Index total_r() const {
    Eigen::Index sum = 0;
    for (const auto& h : H_blocks) sum += h.rows();
    return sum;
  }
  Eigen::Index total_p() const {
    if (!B_blocks) return 0;
    Eigen::Index sum = 0;
    for (const auto& b : *B_blocks) sum += b.cols();
    return sum;
  }
};

inline Plant make_plant(Matrix A, std::vector<Matrix> H_blocks,
                        std::optional<std::vector<Matrix>> B_blocks = std::nullopt) {
  require_square(A, "plant");
  require_finite(A, "plant");
  const Eigen::Index n = A.rows();
  if (H_blocks.empty()) throw std::invalid_argument("plant: at least one output block required");
  for (std::size_t i = 0; i < H_blocks.size(); ++i) {
    require_finite(H_blocks[i], "plant H block");
    if (H_blocks[i].cols() != n)
      throw std::invalid_argument("plant: H block " + std::to_string(i + 1) + " must have n columns");
  }
  if (B_blocks) {
    if (B_blocks->size() != H_blocks.size())
      throw std::invalid_argument("plant: B block count must match H block count");
    for (std::size_t i = 0; i < B_blocks->size(); ++i) {
      require_finite((*B_blocks)[i], "plant B block");
      if ((*B_blocks)[i].rows() != n)
        throw std::invalid_argument("plant: B block " + std::to_string(i + 1) + " must have n rows");
    }
  }
  return Plant{std::move(A), std::move(H_blocks), std::move(B_blocks)};
}

// Ordered index subset of 1..m.
struct SubsystemSelection {
  std::vector<int> indices;
};

inline SubsystemSelection make_selection(std::vector<int> indices, int m) {
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 1 || indices[i] > m)
      throw std::invalid_argument("selection: index out of range");
    if (i > 0 && indices[i] <= indices[i - 1])
      throw std::invalid_argument("selection: indices must be strictly increasing");
  }
  return SubsystemSelection{std::move(indices)};
}

// Vertical stack of the selected H blocks; empty selection gives 0 x n.
inline Matrix stack_H(const Plant& p, const SubsystemSelection& sel) {
  Eigen::Index rows = 0;
  for (int j : sel.indices) rows += p.r(j);
  Matrix out(rows, p.n());
  Eigen::Index at = 0;
  for (int j : sel.indices) {
    out.middleRows(at, p.r(j)) = p.H_blocks[static_cast<std::size_t>(j - 1)];
    at += p.r(j);
  }
  return out;
}

// Horizontal stack of the selected B blocks; empty selection gives n x 0.
inline Matrix stack_B(const Plant& p, const SubsystemSelection& sel) {
  if (!p.B_blocks) throw std::invalid_argument("stack_B: plant has no input blocks");
  Eigen::Index cols = 0;
  for (int j : sel.indices) cols += p.p(j);
  Matrix out(p.n(), cols);
  Eigen::Index at = 0;
  for (int j : sel.indices) {
    out.middleCols(at, p.p(j)) = (*p.B_blocks)[static_cast<std::size_t>(j - 1)];
    at += p.p(j);
  }
  return out;
}

struct PbhResult {
  bool ok = false;
  std::optional<Complex> witness;  // offending unstable eigenvalue on failure
};

namespace detail {

// Distinct unstable eigenvalues of A; the PBH stack depends only on lambda,
// so repeated values are tested once.
inline std::vector<Complex> distinct_unstable(const Matrix& A, const Tolerances& tol) {
  return cluster_values(unstable_eigenvalues(A, tol), tol.eig_sep_tol);
}

}  // namespace detail

// PBH detectability: for every unstable eigenvalue, [A - lambda I; H] must
// have full column rank. Complex lambdas are tested through the real
// embedding with the required rank doubled.
inline PbhResult is_detectable(const Matrix& A, const Matrix& H, const Tolerances& tol) {
  require_square(A, "is_detectable");
  if (H.cols() != A.cols()) throw std::invalid_argument("is_detectable: H must have n columns");
  const Eigen::Index n = A.rows();
  for (const Complex& lambda : detail::distinct_unstable(A, tol)) {
    ComplexMatrix stack(n + H.rows(), n);
    stack.topRows(n) = A.cast<Complex>() - lambda * ComplexMatrix::Identity(n, n);
    stack.bottomRows(H.rows()) = H.cast<Complex>();
    if (rank_tol(real_embedding(stack), tol) < 2 * n) return {false, lambda};
  }
  return {true, std::nullopt};
}

// PBH stabilizability: [A - lambda I, B] full row rank at every unstable
// eigenvalue.
inline PbhResult is_stabilizable(const Matrix& A, const Matrix& B, const Tolerances& tol) {
  require_square(A, "is_stabilizable");
  if (B.rows() != A.rows()) throw std::invalid_argument("is_stabilizable: B must have n rows");
  const Eigen::Index n = A.rows();
  for (const Complex& lambda : detail::distinct_unstable(A, tol)) {
    ComplexMatrix stack(n, n + B.cols());
    stack.leftCols(n) = A.cast<Complex>() - lambda * ComplexMatrix::Identity(n, n);
    stack.rightCols(B.cols()) = B.cast<Complex>();
    if (rank_tol(real_embedding(stack), tol) < 2 * n) return {false, lambda};
  }
  return {true, std::nullopt};
}

struct ComponentDetectability {
  std::vector<int> vertices;
  bool detectable = false;
  std::optional<Complex> witness;
};

// Verdict of the source-component detectability condition: omniscience is
// achievable over the graph iff (A, H_{V_c}) is detectable for every source
// component V_c.
struct OmniscienceConditionReport {
  bool holds = false;
  std::vector<ComponentDetectability> components;
};

inline OmniscienceConditionReport omniscience_condition(const Plant& p, const DirectedGraph& g,
                                                        const Tolerances& tol) {
  if (p.m() != g.m)
    throw std::invalid_argument("omniscience_condition: plant block count does not match graph size");
  OmniscienceConditionReport report;
  report.holds = true;
  for (const SourceComponent& sc : source_components(g)) {
    ComponentDetectability detail;
    detail.vertices = sc.vertices;
    const Matrix H = stack_H(p, make_selection(sc.vertices, g.m));
    const PbhResult res = is_detectable(p.A, H, tol);
    detail.detectable = res.ok;
    detail.witness = res.witness;
    report.holds = report.holds && res.ok;
    report.components.push_back(std::move(detail));
  }
  return report;
}

}  // namespace dobs
