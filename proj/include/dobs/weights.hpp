#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dobs/graph.hpp"
#include "dobs/numerics.hpp"
#include "dobs/rng.hpp"

namespace dobs {

// Weighted Laplacian matrix of a directed graph: l_ji < 0 exactly when the
// edge (i, j) exists, zero off-pattern, and zero row sums.
struct WLM {
  Matrix L;
  DirectedGraph graph;
};

inline void validate_wlm(const Matrix& L, const DirectedGraph& g) {
  require_square(L, "wlm");
  if (L.rows() != g.m) throw std::invalid_argument("wlm: dimension must equal vertex count");
  for (int i = 1; i <= g.m; ++i) {
    for (int j = 1; j <= g.m; ++j) {
      if (i == j) continue;
      const double entry = L(j - 1, i - 1);  // row j, column i reflects edge i -> j
      if (g.has_edge(i, j)) {
        if (!(entry < 0)) throw std::invalid_argument("wlm: entry for edge must be negative");
      } else if (entry != 0.0) {
        throw std::invalid_argument("wlm: entry off the edge pattern must be zero");
      }
    }
  }
  for (int i = 0; i < g.m; ++i)
    if (std::abs(L.row(i).sum()) > 1e-12)
      throw std::invalid_argument("wlm: row sums must vanish");
}

inline WLM make_wlm(Matrix L, DirectedGraph g) {
  validate_wlm(L, g);
  return WLM{std::move(L), std::move(g)};
}

// Random WLM: edge weights uniform in [-2, -0.1], diagonal balances the row.
inline WLM random_wlm(const DirectedGraph& g, std::uint64_t seed) {
  Rng rng(seed);
  Matrix L = Matrix::Zero(g.m, g.m);
  for (const auto& [from, to] : g.edges) L(to - 1, from - 1) = -rng.uniform(0.1, 2.0);
  for (int i = 0; i < g.m; ++i) L(i, i) = -L.row(i).sum();
  return make_wlm(std::move(L), g);
}

namespace detail {

inline bool graph_strongly_connected(const DirectedGraph& g) {
  return strongly_connected_components(g).size() == 1;
}

// Nonzero eigenvalues pairwise separated by at least sep (values inside the
// zero cluster are ignored).
inline bool nonzero_values_separated(const ComplexVector& values, double sep) {
  std::vector<Complex> nz;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (std::abs(values[i]) >= sep) nz.push_back(values[i]);
  for (std::size_t i = 0; i < nz.size(); ++i)
    for (std::size_t j = i + 1; j < nz.size(); ++j)
      if (std::abs(nz[i] - nz[j]) < sep) return false;
  return true;
}

inline bool all_values_separated(const ComplexVector& values, double sep) {
  for (Eigen::Index i = 0; i < values.size(); ++i)
    for (Eigen::Index j = i + 1; j < values.size(); ++j)
      if (std::abs(values[i] - values[j]) < sep) return false;
  return true;
}

}  // namespace detail

// Row rescaling that makes every eigenvalue simple: rows are activated one at
// a time and each new positive scale is halved until the nonzero eigenvalues
// of the partial matrix stay separated. Strong connectivity keeps the zero
// eigenvalue simple in the final matrix.
inline WLM make_simple_spectrum(const WLM& wlm, const Tolerances& tol, std::uint64_t seed) {
  if (!detail::graph_strongly_connected(wlm.graph))
    throw std::invalid_argument("make_simple_spectrum: graph must be strongly connected");
  tol.validate();
  const int m = wlm.graph.m;
  Rng rng(seed);

  Matrix base = wlm.L;
  constexpr int kMaxHalvings = 60;
  constexpr int kMaxRestarts = 8;
  for (int restart = 0; restart < kMaxRestarts; ++restart) {
    Matrix scaled = Matrix::Zero(m, m);
    bool failed = false;
    for (int row = 0; row < m && !failed; ++row) {
      double alpha = 1.0;
      bool ok = false;
      for (int h = 0; h <= kMaxHalvings; ++h) {
        scaled.row(row) = alpha * base.row(row);
        const ComplexVector values = detail::eigvals_with_retry(scaled, "make_simple_spectrum");
        const bool final_row = (row == m - 1);
        if (final_row ? detail::all_values_separated(values, tol.eig_sep_tol)
                      : detail::nonzero_values_separated(values, tol.eig_sep_tol)) {
          ok = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!ok) {
        scaled.row(row).setZero();
        failed = true;
      }
    }
    if (!failed) return make_wlm(std::move(scaled), wlm.graph);
    // Perturb the edge weights and try again.
    base = wlm.L;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j)
        if (i != j && base(i, j) != 0.0) base(i, j) *= rng.uniform(0.8, 1.25);
      base(i, i) = 0.0;
      base(i, i) = -base.row(i).sum();
    }
  }
  throw Error("make_simple_spectrum: failed to separate eigenvalues after restarts");
}

enum class PerronMode { Observable, Controllable };

namespace detail {

inline Matrix observability_stack(const Matrix& A, const Matrix& C) {
  const Eigen::Index n = A.rows();
  Matrix stack(C.rows() * n, n);
  Matrix row = C;
  for (Eigen::Index k = 0; k < n; ++k) {
    stack.middleRows(k * C.rows(), C.rows()) = row;
    row = row * A;
  }
  return stack;
}

inline Matrix controllability_stack(const Matrix& A, const Matrix& B) {
  const Eigen::Index n = A.rows();
  Matrix stack(n, B.cols() * n);
  Matrix col = B;
  for (Eigen::Index k = 0; k < n; ++k) {
    stack.middleCols(k * B.cols(), B.cols()) = col;
    col = A * col;
  }
  return stack;
}

}  // namespace detail

// WLM whose pair with the anchor coordinate is observable (or controllable):
// draws a nonnegative realization of the graph with self-loops, then applies
// the Perron eigenvector similarity so rows sum to zero while the PBH
// structure of the realization is preserved.
inline WLM perron_wlm(const DirectedGraph& g, int anchor, PerronMode mode, std::uint64_t seed,
                      const Tolerances& tol) {
  if (!detail::graph_strongly_connected(g))
    throw std::invalid_argument("perron_wlm: graph must be strongly connected");
  if (anchor < 1 || anchor > g.m) throw std::invalid_argument("perron_wlm: anchor out of range");
  tol.validate();
  const int m = g.m;
  Rng rng(seed);

  for (int attempt = 0; attempt < 20; ++attempt) {
    // Nonnegative realization consistent with the graph plus self-loops.
    Matrix A1 = Matrix::Zero(m, m);
    for (const auto& [from, to] : g.edges) A1(to - 1, from - 1) = rng.uniform(0.1, 2.0);
    for (int i = 0; i < m; ++i) A1(i, i) = rng.uniform(0.1, 2.0);

    Matrix anchor_vec = Matrix::Zero(1, m);
    anchor_vec(0, anchor - 1) = 1.0;
    const Matrix stack = (mode == PerronMode::Observable)
                             ? detail::observability_stack(A1, anchor_vec)
                             : detail::controllability_stack(A1, anchor_vec.transpose());
    if (rank_tol(stack, tol) < m) continue;

    // Perron eigenpair: dominant eigenvalue of an irreducible, aperiodic
    // nonnegative matrix is real with a positive eigenvector.
    const Spectrum spec = spectrum(A1, tol);
    Eigen::Index dominant = 0;
    for (Eigen::Index i = 1; i < spec.values.size(); ++i)
      if (std::abs(spec.values[i]) > std::abs(spec.values[dominant])) dominant = i;
    const double lambda = spec.values[dominant].real();
    ComplexVector v = spec.right.col(dominant);
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
      if (std::abs(v[i]) > std::abs(v[pivot])) pivot = i;
    v *= std::conj(v[pivot]) / std::abs(v[pivot]);
    Vector pf = v.real();
    if (std::abs(spec.values[dominant].imag()) > 1e-9 || pf.minCoeff() <= 0) continue;

    const Vector inv = pf.cwiseInverse();
    Matrix L = Matrix::Identity(m, m) - (inv.asDiagonal() * A1 * pf.asDiagonal()) / lambda;
    // The similarity can leave row sums off by rounding only; rebalance the
    // diagonal so the WLM properties hold exactly.
    for (int i = 0; i < m; ++i) L(i, i) -= L.row(i).sum();

    Matrix anchor_out = Matrix::Zero(1, m);
    anchor_out(0, anchor - 1) = 1.0;
    const Matrix check = (mode == PerronMode::Observable)
                             ? detail::observability_stack(L, anchor_out)
                             : detail::controllability_stack(L, anchor_out.transpose());
    if (rank_tol(check, tol) < m) continue;
    return make_wlm(std::move(L), g);
  }
  throw Error("perron_wlm: no observable/controllable realization found after 20 draws");
}

// Eigen-structure verdicts: no zero eigenvector entries (P1), simple
// eigenvalues (P2), and the unique eigenvalue product property of a
// Kronecker pair.
struct EigCheckReport {
  bool p1_pass = true;
  bool p2_pass = true;
  bool uepp_pass = true;
  bool p1_indeterminate = false;
  std::vector<std::string> details;
};

inline EigCheckReport check_p1_p2(const Matrix& M, const Tolerances& tol) {
  EigCheckReport report;
  const Spectrum s = spectrum(M, tol);
  for (std::size_t i = 0; i < s.repeated.size(); ++i) {
    if (s.repeated[i]) {
      report.p2_pass = false;
      std::ostringstream msg;
      msg << "repeated eigenvalue " << s.values[static_cast<Eigen::Index>(i)];
      report.details.push_back(msg.str());
    }
  }
  if (!report.p2_pass) {
    // Eigenvectors of clustered eigenvalues are not individually meaningful.
    report.p1_pass = false;
    report.p1_indeterminate = true;
    return report;
  }
  for (Eigen::Index j = 0; j < s.values.size(); ++j) {
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      const bool right_zero = std::abs(s.right(i, j)) < tol.zero_entry_tol;
      const bool left_zero = std::abs(s.left(i, j)) < tol.zero_entry_tol;
      if (right_zero || left_zero) {
        report.p1_pass = false;
        std::ostringstream msg;
        msg << (right_zero ? "right" : "left") << " eigenvector of " << s.values[j]
            << " has zero entry " << (i + 1);
        report.details.push_back(msg.str());
      }
    }
  }
  return report;
}

inline EigCheckReport check_uepp(const Matrix& W, const Matrix& A, const Tolerances& tol) {
  require_square(W, "check_uepp");
  require_square(A, "check_uepp");
  EigCheckReport report;

  const ComplexVector w_values = detail::eigvals_with_retry(W, "check_uepp");
  const ComplexVector a_values = detail::eigvals_with_retry(A, "check_uepp");
  std::vector<Complex> w_all(w_values.data(), w_values.data() + w_values.size());
  std::vector<Complex> a_all(a_values.data(), a_values.data() + a_values.size());
  // Equal factors collapse first: multiplicity never counts as a collision.
  const std::vector<Complex> w_reps = cluster_values(w_all, tol.eig_sep_tol);
  const std::vector<Complex> a_reps = cluster_values(a_all, tol.eig_sep_tol);

  struct ProductEntry {
    Complex value;
    std::size_t wi, ai;
  };
  std::vector<ProductEntry> products;
  for (std::size_t i = 0; i < w_reps.size(); ++i)
    for (std::size_t j = 0; j < a_reps.size(); ++j)
      products.push_back({w_reps[i] * a_reps[j], i, j});

  for (std::size_t a = 0; a < products.size(); ++a) {
    for (std::size_t b = a + 1; b < products.size(); ++b) {
      if (std::abs(products[a].value) <= tol.eig_sep_tol &&
          std::abs(products[b].value) <= tol.eig_sep_tol)
        continue;  // zero products are exempt
      if (std::abs(products[a].value - products[b].value) < tol.eig_sep_tol) {
        report.uepp_pass = false;
        std::ostringstream msg;
        msg << "product collision: " << w_reps[products[a].wi] << "*" << a_reps[products[a].ai]
            << " ~ " << w_reps[products[b].wi] << "*" << a_reps[products[b].ai] << " = "
            << products[a].value;
        report.details.push_back(msg.str());
      }
    }
  }
  return report;
}

// Stochastic scaling W = I - alpha L with alpha drawn below the row-mass
// bound and resampled until W (x) A has uniquely factorable nonzero
// eigenvalue products.
struct AlphaResult {
  double alpha = 0;
  Matrix W;
};

inline double alpha_upper_bound(const Matrix& L) {
  double max_diag = 0;
  for (Eigen::Index i = 0; i < L.rows(); ++i) max_diag = std::max(max_diag, L(i, i));
  return 1.0 / (2.0 * max_diag + 1e-9);
}

inline AlphaResult choose_alpha(const WLM& wlm, const Matrix& A, const Tolerances& tol,
                                std::uint64_t seed) {
  require_square(A, "choose_alpha");
  tol.validate();
  Rng rng(seed);
  const int m = wlm.graph.m;
  const double bound = alpha_upper_bound(wlm.L);

  const bool zero_spectrum = spectral_radius(A) <= tol.eig_sep_tol;
  std::vector<std::string> last_details;
  for (int draw = 0; draw < 50; ++draw) {
    const double alpha = rng.uniform(0.0, bound);
    if (alpha == 0.0) continue;
    Matrix W = Matrix::Identity(m, m) - alpha * wlm.L;
    if (zero_spectrum) return {alpha, std::move(W)};  // all products vanish
    const EigCheckReport report = check_uepp(W, A, tol);
    if (report.uepp_pass) return {alpha, std::move(W)};
    last_details = report.details;
  }
  std::string msg = "choose_alpha: eigenvalue products collide for every sampled alpha";
  for (const auto& d : last_details) msg += "; " + d;
  throw Error(msg);
}

// Unique factorization of a nonzero eigenvalue of W (x) A into eigenvalues of
// the factors, with the matching eigenvector pair.
struct KronFactorization {
  Complex lambda_w;
  Complex lambda_a;
  ComplexVector v;  // eigenvector of W
  ComplexVector p;  // eigenvector of A
};

inline KronFactorization kron_eigvec_factorization(const Matrix& W, const Matrix& A, Complex lambda,
                                                   const Tolerances& tol) {
  const Spectrum ws = spectrum(W, tol);
  if (!ws.all_simple())
    throw std::invalid_argument("kron_eigvec_factorization: W must have simple eigenvalues");
  if (!check_uepp(W, A, tol).uepp_pass)
    throw std::invalid_argument("kron_eigvec_factorization: product property does not hold");
  if (std::abs(lambda) <= tol.eig_sep_tol)
    throw std::invalid_argument("kron_eigvec_factorization: lambda must be nonzero");
  const Spectrum as = spectrum(A, tol);

  Eigen::Index best_w = -1, best_a = -1;
  double best = 0;
  for (Eigen::Index i = 0; i < ws.values.size(); ++i) {
    for (Eigen::Index j = 0; j < as.values.size(); ++j) {
      const double dist = std::abs(ws.values[i] * as.values[j] - lambda);
      if (best_w < 0 || dist < best) {
        best = dist;
        best_w = i;
        best_a = j;
      }
    }
  }
  if (best >= tol.eig_sep_tol)
    throw std::invalid_argument("kron_eigvec_factorization: lambda is not an eigenvalue product");

  KronFactorization f;
  f.lambda_w = ws.values[best_w];
  f.lambda_a = as.values[best_a];
  f.v = ws.right.col(best_w);
  f.p = as.right.col(best_a);

  const ComplexVector q = kron(ComplexMatrix(f.v), ComplexMatrix(f.p));
  const ComplexMatrix WA = kron(W, A).cast<Complex>();
  const double residual = (WA * q - lambda * q).norm();
  if (residual > tol.eig_sep_tol)
    throw Error("kron_eigvec_factorization: reconstructed eigenvector residual too large");
  return f;
}

// Row-stochastic weight matrix consistent with the graph, with the permuted
// block structure: one stochastic block per source component, zero elsewhere
// in those rows, and a lower-triangular non-source block whose diagonal is
// small enough that its products with the plant spectrum stay stable.
struct BlockLayout {
  std::vector<int> permuted_vertices;                  // position -> original vertex
  std::vector<std::pair<int, int>> source_ranges;      // [begin, end) per source block
  std::pair<int, int> nonsource_range{0, 0};           // [begin, end)
};

struct WeightMatrix {
  Matrix W;
  std::optional<BlockLayout> layout;
  std::optional<std::vector<double>> alphas;
};

inline DirectedGraph induced_subgraph(const DirectedGraph& g, const std::vector<int>& vertices) {
  std::map<int, int> local;
  for (std::size_t k = 0; k < vertices.size(); ++k) local[vertices[k]] = static_cast<int>(k + 1);
  std::set<std::pair<int, int>> edges;
  for (const auto& [from, to] : g.edges) {
    const auto fi = local.find(from);
    const auto ti = local.find(to);
    if (fi != local.end() && ti != local.end()) edges.insert({fi->second, ti->second});
  }
  return make_graph(static_cast<int>(vertices.size()), edges);
}

inline void check_weight_consistency(const Matrix& W, const DirectedGraph& g) {
  require_square(W, "weight matrix");
  if (W.rows() != g.m) throw std::invalid_argument("weight matrix: dimension must equal vertex count");
  const auto nbhd = neighborhoods(g);
  for (int i = 1; i <= g.m; ++i) {
    if (std::abs(W.row(i - 1).sum() - 1.0) > 1e-10)
      throw std::invalid_argument("weight matrix: row " + std::to_string(i) + " does not sum to 1");
    for (int j = 1; j <= g.m; ++j)
      if (W(i - 1, j - 1) != 0.0 && nbhd[static_cast<std::size_t>(i - 1)].count(j) == 0)
        throw std::invalid_argument("weight matrix: nonzero weight outside neighborhood of " +
                                    std::to_string(i));
  }
}

inline WeightMatrix build_weight_matrix(const DirectedGraph& g, const Matrix& A,
                                        const Tolerances& tol, std::uint64_t seed) {
  require_square(A, "build_weight_matrix");
  tol.validate();
  Rng rng(seed);

  const auto sources = source_components(g);
  const auto forest = rooted_forest_over_nonsource(g, sources);

  Matrix W = Matrix::Zero(g.m, g.m);
  BlockLayout layout;
  std::vector<double> alphas;

  // Stochastic blocks with simple spectra and zero-free eigenvectors on each
  // source component; rejection sampling turns the almost-sure guarantee into
  // a constructive loop.
  for (const SourceComponent& sc : sources) {
    const DirectedGraph sub = induced_subgraph(g, sc.vertices);
    std::optional<AlphaResult> accepted;
    for (int attempt = 0; attempt < 25 && !accepted; ++attempt) {
      const WLM raw = random_wlm(sub, rng.next_u64());
      WLM simple = make_simple_spectrum(raw, tol, rng.next_u64());
      const EigCheckReport lap_report = check_p1_p2(simple.L, tol);
      if (!lap_report.p1_pass || !lap_report.p2_pass) continue;
      AlphaResult ar = choose_alpha(simple, A, tol, rng.next_u64());
      const EigCheckReport block_report = check_p1_p2(ar.W, tol);
      if (!block_report.p1_pass || !block_report.p2_pass) continue;
      accepted = std::move(ar);
    }
    if (!accepted)
      throw Error("build_weight_matrix: eigenvector/simplicity rejection exceeded 25 attempts");
    const int begin = static_cast<int>(layout.permuted_vertices.size());
    for (std::size_t a = 0; a < sc.vertices.size(); ++a) {
      layout.permuted_vertices.push_back(sc.vertices[a]);
      for (std::size_t b = 0; b < sc.vertices.size(); ++b)
        W(sc.vertices[a] - 1, sc.vertices[b] - 1) =
            accepted->W(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
    layout.source_ranges.push_back({begin, begin + static_cast<int>(sc.vertices.size())});
    alphas.push_back(accepted->alpha);
  }

  // Non-source rows: forest order makes the trailing block lower triangular;
  // all its eigenvalues equal the diagonal weight delta, which is halved until
  // the stability product with the plant holds and all rows stay positive.
  const std::vector<int>& order = forest.order;
  std::set<int> source_vertices;
  for (const auto& sc : sources) source_vertices.insert(sc.vertices.begin(), sc.vertices.end());
  std::map<int, int> order_pos;
  for (std::size_t k = 0; k < order.size(); ++k) order_pos[order[k]] = static_cast<int>(k);
  std::map<int, int> parent_of;
  for (const auto& tree : forest.trees)
    for (const auto& [child, parent] : tree.parent) parent_of[child] = parent;

  const auto nbhd = neighborhoods(g);
  if (!order.empty()) {
    // Per-vertex in-neighbors eligible for the small weight, and the carrier
    // of the row remainder.
    struct RowPlan {
      int vertex;
      int target;
      std::vector<int> small;
    };
    std::vector<RowPlan> plans;
    int max_small = 0;
    for (int v : order) {
      RowPlan plan;
      plan.vertex = v;
      if (parent_of.count(v)) {
        plan.target = parent_of[v];
      } else {
        plan.target = 0;
        for (int u : nbhd[static_cast<std::size_t>(v - 1)])
          if (u != v && source_vertices.count(u)) {
            plan.target = u;
            break;  // neighborhoods are sorted: lowest label wins
          }
        if (plan.target == 0) throw Error("build_weight_matrix: root without source in-neighbor");
      }
      for (int u : nbhd[static_cast<std::size_t>(v - 1)]) {
        if (u == v || u == plan.target) continue;
        const bool earlier_tree = order_pos.count(u) && order_pos[u] < order_pos[v];
        if (source_vertices.count(u) || earlier_tree) plan.small.push_back(u);
      }
      max_small = std::max(max_small, static_cast<int>(plan.small.size()));
      plans.push_back(std::move(plan));
    }

    const double rho_a = spectral_radius(A);
    double delta = 0.05;
    while (delta * rho_a >= 1.0 - tol.stability_margin ||
           1.0 - delta * (max_small + 1) <= 0.0)
      delta *= 0.5;

    for (const RowPlan& plan : plans) {
      W(plan.vertex - 1, plan.vertex - 1) = delta;
      for (int u : plan.small) W(plan.vertex - 1, u - 1) = delta;
      W(plan.vertex - 1, plan.target - 1) =
          1.0 - delta * (static_cast<double>(plan.small.size()) + 1.0);
    }
    const int begin = static_cast<int>(layout.permuted_vertices.size());
    for (int v : order) layout.permuted_vertices.push_back(v);
    layout.nonsource_range = {begin, begin + static_cast<int>(order.size())};
  } else {
    layout.nonsource_range = {g.m, g.m};
  }

  WeightMatrix result{std::move(W), std::move(layout), std::move(alphas)};

  // Structural sanity: stochastic rows, graph-consistent sparsity, block
  // template in permuted coordinates, stable non-source spectrum, and the
  // eigenvector factorization of every unstable product.
  check_weight_consistency(result.W, g);
  const auto& lay = *result.layout;
  auto permuted = [&](int pi, int pj) {
    return result.W(lay.permuted_vertices[static_cast<std::size_t>(pi)] - 1,
                    lay.permuted_vertices[static_cast<std::size_t>(pj)] - 1);
  };
  for (std::size_t b = 0; b < lay.source_ranges.size(); ++b) {
    const auto [lo, hi] = lay.source_ranges[b];
    for (int i = lo; i < hi; ++i)
      for (int j = 0; j < g.m; ++j)
        if ((j < lo || j >= hi) && permuted(i, j) != 0.0)
          throw Error("build_weight_matrix: source row leaks outside its block");
  }
  const auto [nlo, nhi] = lay.nonsource_range;
  for (int i = nlo; i < nhi; ++i)
    for (int j = i + 1; j < nhi; ++j)
      if (permuted(i, j) != 0.0)
        throw Error("build_weight_matrix: non-source block is not lower triangular");
  if (nhi > nlo) {
    Matrix W33(nhi - nlo, nhi - nlo);
    for (int i = nlo; i < nhi; ++i)
      for (int j = nlo; j < nhi; ++j) W33(i - nlo, j - nlo) = permuted(i, j);
    if (spectral_radius(W33) * spectral_radius(A) >= 1.0 - tol.stability_margin)
      throw Error("build_weight_matrix: non-source spectrum not contractive against the plant");
  }
  for (std::size_t b = 0; b < lay.source_ranges.size(); ++b) {
    const auto [lo, hi] = lay.source_ranges[b];
    Matrix Wb(hi - lo, hi - lo);
    for (int i = lo; i < hi; ++i)
      for (int j = lo; j < hi; ++j) Wb(i - lo, j - lo) = permuted(i, j);
    for (const Complex& lambda :
         cluster_values(unstable_eigenvalues(kron(Wb, A), tol), tol.eig_sep_tol)) {
      const KronFactorization f = kron_eigvec_factorization(Wb, A, lambda, tol);
      if (std::abs(f.lambda_a) < 1.0 - 1e-9)
        throw Error("build_weight_matrix: unstable product factor is not an unstable plant mode");
    }
  }
  return result;
}

}  // namespace dobs
