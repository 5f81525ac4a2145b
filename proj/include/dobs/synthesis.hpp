#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "dobs/fixed_modes.hpp"
#include "dobs/numerics.hpp"
#include "dobs/pattern_search.hpp"
#include "dobs/plant.hpp"
#include "dobs/rng.hpp"
#include "dobs/weights.hpp"

namespace dobs {

// Per-observer gains: innovation gain K_i, augmented-state couplings P_i and
// Q_i, augmented-state dynamics S_i. mu_i = 0 blocks are legal empty matrices.
struct GainSet {
  std::vector<Matrix> K;  // n x r_i
  std::vector<Matrix> P;  // n x mu_i
  std::vector<Matrix> Q;  // mu_i x r_i
  std::vector<Matrix> S;  // mu_i x mu_i
  std::vector<int> mu;

  Eigen::Index total_mu() const {
    Eigen::Index sum = 0;
    for (int v : mu) sum += v;
    return sum;
  }
};

inline GainSet zero_gains(const Plant& p, const std::vector<int>& mu) {
  if (static_cast<int>(mu.size()) != p.m())
    throw std::invalid_argument("gains: mu list must have one entry per observer");
  GainSet g;
  g.mu = mu;
  for (int i = 1; i <= p.m(); ++i) {
    const Eigen::Index mi = mu[static_cast<std::size_t>(i - 1)];
    if (mi < 0) throw std::invalid_argument("gains: mu must be nonnegative");
    g.K.push_back(Matrix::Zero(p.n(), p.r(i)));
    g.P.push_back(Matrix::Zero(p.n(), mi));
    g.Q.push_back(Matrix::Zero(mi, p.r(i)));
    g.S.push_back(Matrix::Zero(mi, mi));
  }
  return g;
}

inline void validate_gains(const Plant& p, const GainSet& g) {
  if (static_cast<int>(g.K.size()) != p.m() || static_cast<int>(g.mu.size()) != p.m())
    throw std::invalid_argument("gains: block count must match plant");
  for (int i = 1; i <= p.m(); ++i) {
    const auto idx = static_cast<std::size_t>(i - 1);
    const Eigen::Index mi = g.mu[idx];
    if (g.K[idx].rows() != p.n() || g.K[idx].cols() != p.r(i) || g.P[idx].rows() != p.n() ||
        g.P[idx].cols() != mi || g.Q[idx].rows() != mi || g.Q[idx].cols() != p.r(i) ||
        g.S[idx].rows() != mi || g.S[idx].cols() != mi)
      throw std::invalid_argument("gains: block shapes inconsistent with plant/mu");
  }
}

// Autonomous dynamics of the stacked estimation errors and augmented states:
// [[W (x) A - diag(K_i H_i), -diag(P_i)], [diag(Q_i H_i), diag(S_i)]].
inline Matrix error_matrix(const WeightMatrix& W, const Plant& p, const GainSet& g) {
  validate_gains(p, g);
  if (W.W.rows() != p.m())
    throw std::invalid_argument("error_matrix: weight matrix size must match plant block count");
  const Eigen::Index n = p.n();
  const int m = p.m();
  const Eigen::Index mn = m * n;
  const Eigen::Index mu_total = g.total_mu();

  Matrix E = Matrix::Zero(mn + mu_total, mn + mu_total);
  E.topLeftCorner(mn, mn) = kron(W.W, p.A);
  Eigen::Index mu_at = mn;
  for (int i = 0; i < m; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const Eigen::Index mi = g.mu[idx];
    const Matrix& Hi = p.H_blocks[idx];
    E.block(i * n, i * n, n, n) -= g.K[idx] * Hi;
    E.block(i * n, mu_at, n, mi) = -g.P[idx];
    E.block(mu_at, i * n, mi, n) = g.Q[idx] * Hi;
    E.block(mu_at, mu_at, mi, mi) = g.S[idx];
    mu_at += mi;
  }
  return E;
}

struct Certificate {
  double radius = 0;
  bool pass = false;
};

// Re-derives the spectral radius of the error dynamics from scratch; the
// universal pass criterion for omniscience claims.
inline Certificate verify_omniscience_certificate(const WeightMatrix& W, const Plant& p,
                                                  const GainSet& g, const Tolerances& tol) {
  tol.validate();
  const double radius = spectral_radius(error_matrix(W, p, g));
  return {radius, radius < 1.0};
}

struct SynthesisOptions {
  std::uint64_t seed = 0;
  int restarts = 8;
  long max_iters = 2000;  // objective evaluations per restart
};

struct SynthesisResult {
  GainSet gains;
  double closed_loop_radius = 0;
  long iterations = 0;
  bool converged = false;
  std::uint64_t seed = 0;
};

// Synthesis is impossible when an unstable fixed mode is present; signalled
// separately from budget exhaustion.
struct FixedModeObstruction : Error {
  using Error::Error;
};

namespace detail {

// Flattens the gain blocks into the search vector and back.
struct GainPacker {
  std::vector<std::pair<int, int>> shapes;  // per block of K,P,Q,S in order
  Eigen::Index total = 0;

  explicit GainPacker(const GainSet& g) {
    auto add = [&](const std::vector<Matrix>& blocks) {
      for (const Matrix& b : blocks) {
        shapes.push_back({static_cast<int>(b.rows()), static_cast<int>(b.cols())});
        total += b.size();
      }
    };
    add(g.K);
    add(g.P);
    add(g.Q);
    add(g.S);
  }

  Eigen::VectorXd pack(const GainSet& g) const {
    Eigen::VectorXd theta(total);
    Eigen::Index at = 0;
    auto put = [&](const std::vector<Matrix>& blocks) {
      for (const Matrix& b : blocks) {
        for (Eigen::Index c = 0; c < b.cols(); ++c)
          for (Eigen::Index r = 0; r < b.rows(); ++r) theta[at++] = b(r, c);
      }
    };
    put(g.K);
    put(g.P);
    put(g.Q);
    put(g.S);
    return theta;
  }

  void unpack(const Eigen::VectorXd& theta, GainSet& g) const {
    Eigen::Index at = 0;
    auto get = [&](std::vector<Matrix>& blocks) {
      for (Matrix& b : blocks) {
        for (Eigen::Index c = 0; c < b.cols(); ++c)
          for (Eigen::Index r = 0; r < b.rows(); ++r) b(r, c) = theta[at++];
      }
    };
    get(g.K);
    get(g.P);
    get(g.Q);
    get(g.S);
  }
};

// Output injection shrinking the unstable modes of M toward half their
// modulus, projected in least squares onto the diagonal feedback structure
// K_i H_i. Spectral projectors use the left/right eigenvector pairing.
inline Matrix mode_shrinking_injection(const Matrix& M, const Tolerances& tol) {
  const Spectrum s = spectrum(M, tol);
  ComplexMatrix delta = ComplexMatrix::Zero(M.rows(), M.cols());
  for (Eigen::Index j = 0; j < s.values.size(); ++j) {
    if (std::abs(s.values[j]) < 1.0 - tol.stability_margin) continue;
    const Complex denom = s.left.col(j).transpose() * s.right.col(j);
    if (std::abs(denom) < 1e-10) continue;  // near-defective; leave to the search
    delta += (0.5 * s.values[j] / denom) * (s.right.col(j) * s.left.col(j).transpose());
  }
  return delta.real();
}

inline Matrix pinv(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return Matrix::Zero(m.cols(), m.rows());
  return m.completeOrthogonalDecomposition().pseudoInverse();
}

// Steady-state output-injection gain from the iterated filter Riccati
// recursion with unit weights. For a detectable pair this stabilizes
// M - K C; callers project the dense gain onto their sparsity pattern.
inline Matrix kalman_injection_gain(const Matrix& M, const Matrix& C) {
  const Eigen::Index nn = M.rows();
  const Eigen::Index rr = C.rows();
  if (rr == 0) return Matrix::Zero(nn, 0);
  Matrix P = Matrix::Identity(nn, nn);
  for (int it = 0; it < 300; ++it) {
    const Matrix S = C * P * C.transpose() + Matrix::Identity(rr, rr);
    const Matrix G = M * P * C.transpose() * S.inverse();
    P = M * P * M.transpose() - G * C * P * M.transpose() + Matrix::Identity(nn, nn);
    if (!P.allFinite() || P.cwiseAbs().maxCoeff() > 1e14) return Matrix::Zero(nn, rr);
  }
  const Matrix S = C * P * C.transpose() + Matrix::Identity(rr, rr);
  return M * P * C.transpose() * S.inverse();
}

// State-feedback gain F with M + B F stable for a stabilizable pair, by the
// dual Riccati recursion.
inline Matrix lqr_state_feedback(const Matrix& M, const Matrix& B) {
  return -kalman_injection_gain(M.transpose(), B.transpose()).transpose();
}

// Seeded multi-start pattern search: each restart begins from one of the
// candidate points, with growing perturbations on later rounds.
struct MultiStartResult {
  Eigen::VectorXd point;
  double value = 0;
  long evals = 0;
  bool reached_target = false;
};

inline MultiStartResult multi_start_search(const std::function<double(const Eigen::VectorXd&)>& f,
                                           const std::vector<Eigen::VectorXd>& starts,
                                           const SynthesisOptions& opts, double target,
                                           std::uint64_t stream) {
  PatternSearchOptions search;
  search.max_evals = opts.max_iters;
  search.target = target;

  MultiStartResult best;
  best.value = std::numeric_limits<double>::infinity();
  Rng rng(Rng::derive_seed(opts.seed, stream));
  const std::size_t n_starts = starts.size();
  for (int restart = 0; restart < std::max(1, opts.restarts); ++restart) {
    Eigen::VectorXd start = starts[static_cast<std::size_t>(restart) % n_starts];
    const int round = restart / static_cast<int>(n_starts);
    if (round > 0) {
      const double scale = 0.15 * round;
      for (Eigen::Index i = 0; i < start.size(); ++i) start[i] += scale * rng.gaussian();
    }
    search.initial_step = (restart % 3 == 0) ? 0.5 : (restart % 3 == 1 ? 0.2 : 1.0);
    const PatternSearchResult run = pattern_search(f, start, search);
    best.evals += run.evals;
    if (run.value < best.value) {
      best.value = run.value;
      best.point = run.point;
    }
    if (run.reached_target) {
      best.reached_target = true;
      break;
    }
  }
  return best;
}

}  // namespace detail

// Gain synthesis by direct spectral-radius minimization: a per-source-block
// mode-shrinking warm start followed by seeded pattern-search restarts.
inline SynthesisResult synthesize_gains(const WeightMatrix& W, const Plant& p,
                                        const std::vector<int>& mu, const SynthesisOptions& opts,
                                        const Tolerances& tol) {
  tol.validate();
  {
    const FixedModeReport gate = unstable_fixed_modes(build_triple(W, p), tol);
    if (gate.has_unstable_fixed_mode)
      throw FixedModeObstruction(
          "synthesize_gains: unstable fixed mode present; no gain choice can achieve omniscience "
          "with this weight matrix");
  }

  const Eigen::Index n = p.n();
  GainSet warm = zero_gains(p, mu);

  // Warm start: per source block, shrink the unstable modes of W_c (x) A and
  // project the correction onto the K_i H_i pattern.
  std::vector<std::vector<int>> blocks;
  if (W.layout && !W.layout->source_ranges.empty()) {
    for (const auto& [lo, hi] : W.layout->source_ranges) {
      std::vector<int> vertices;
      for (int k = lo; k < hi; ++k)
        vertices.push_back(W.layout->permuted_vertices[static_cast<std::size_t>(k)]);
      std::sort(vertices.begin(), vertices.end());
      blocks.push_back(std::move(vertices));
    }
  } else {
    std::vector<int> all;
    for (int v = 1; v <= p.m(); ++v) all.push_back(v);
    blocks.push_back(std::move(all));
  }
  GainSet warm_shrink = warm;
  GainSet warm_kalman = warm;
  for (const std::vector<int>& vertices : blocks) {
    const auto mb = static_cast<Eigen::Index>(vertices.size());
    Matrix Wc(mb, mb);
    for (Eigen::Index a = 0; a < mb; ++a)
      for (Eigen::Index b = 0; b < mb; ++b)
        Wc(a, b) = W.W(vertices[static_cast<std::size_t>(a)] - 1,
                       vertices[static_cast<std::size_t>(b)] - 1);
    const Matrix Mc = kron(Wc, p.A);

    const Matrix delta = detail::mode_shrinking_injection(Mc, tol);
    Eigen::Index r_total = 0;
    for (int vertex : vertices) r_total += p.r(vertex);
    Matrix Hc = Matrix::Zero(r_total, mb * n);
    Eigen::Index r_at = 0;
    for (Eigen::Index b = 0; b < mb; ++b) {
      const int vertex = vertices[static_cast<std::size_t>(b)];
      Hc.block(r_at, b * n, p.r(vertex), n) = p.H_blocks[static_cast<std::size_t>(vertex - 1)];
      r_at += p.r(vertex);
    }
    const Matrix dense_kalman = detail::kalman_injection_gain(Mc, Hc);

    r_at = 0;
    for (Eigen::Index b = 0; b < mb; ++b) {
      const int vertex = vertices[static_cast<std::size_t>(b)];
      const Matrix& Hi = p.H_blocks[static_cast<std::size_t>(vertex - 1)];
      if (Hi.rows() > 0) {
        warm_shrink.K[static_cast<std::size_t>(vertex - 1)] =
            delta.block(b * n, b * n, n, n) * detail::pinv(Hi);
        warm_kalman.K[static_cast<std::size_t>(vertex - 1)] =
            dense_kalman.block(b * n, r_at, n, Hi.rows());
      }
      r_at += Hi.rows();
    }
  }

  const detail::GainPacker packer(warm);
  GainSet work = warm;
  auto objective = [&](const Eigen::VectorXd& theta) {
    packer.unpack(theta, work);
    return spectral_radius(error_matrix(W, p, work));
  };

  // Candidate starts ordered by measured radius.
  std::vector<std::pair<double, Eigen::VectorXd>> ranked;
  for (const GainSet* candidate : {&warm_kalman, &warm_shrink, &warm}) {
    const Eigen::VectorXd theta = packer.pack(*candidate);
    ranked.push_back({objective(theta), theta});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Eigen::VectorXd> starts;
  for (auto& [value, theta] : ranked) starts.push_back(std::move(theta));

  const detail::MultiStartResult run =
      detail::multi_start_search(objective, starts, opts, 1.0 - tol.stability_margin, 0xa11);

  SynthesisResult best;
  best.seed = opts.seed;
  best.iterations = run.evals + static_cast<long>(starts.size());
  packer.unpack(run.point, work);
  best.gains = work;
  best.closed_loop_radius = run.value;
  best.converged = best.closed_loop_radius < 1.0 - tol.stability_margin;
  return best;
}

// mu_i = n first; if the search stalls, one escalation to mu_i = 2n.
struct EscalatedSynthesis {
  SynthesisResult result;
  bool escalated = false;
};

inline EscalatedSynthesis synthesize_gains_escalating(const WeightMatrix& W, const Plant& p,
                                                      const SynthesisOptions& opts,
                                                      const Tolerances& tol,
                                                      std::optional<std::vector<int>> mu_override =
                                                          std::nullopt) {
  std::vector<int> mu;
  if (mu_override) {
    mu = *mu_override;
  } else {
    mu.assign(static_cast<std::size_t>(p.m()), static_cast<int>(p.n()));
  }
  EscalatedSynthesis out;
  out.result = synthesize_gains(W, p, mu, opts, tol);
  if (out.result.converged || mu_override) return out;

  std::vector<int> doubled(static_cast<std::size_t>(p.m()), static_cast<int>(2 * p.n()));
  SynthesisResult second = synthesize_gains(W, p, doubled, opts, tol);
  if (second.closed_loop_radius < out.result.closed_loop_radius) {
    out.result = std::move(second);
    out.escalated = true;
  }
  return out;
}

}  // namespace dobs
