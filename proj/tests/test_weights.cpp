#include <catch_amalgamated.hpp>

#include "dobs/weights.hpp"
#include "support/helpers.hpp"

using namespace dobs;

namespace {
const Tolerances tol;

DirectedGraph two_cycle() { return make_graph(2, {{1, 2}, {2, 1}}); }

DirectedGraph strongly_connected(int m, Rng& rng) {
  std::set<std::pair<int, int>> edges;
  for (int i = 1; i <= m; ++i) edges.insert({i, i % m + 1});
  for (int i = 1; i <= m; ++i)
    for (int j = 1; j <= m; ++j)
      if (i != j && rng.bernoulli(0.3)) edges.insert({i, j});
  return make_graph(m, edges);
}

// Independent collision count: enumerate factor pairs over the separately
// computed spectra for every eigenvalue of the actual Kronecker product.
bool uepp_by_enumeration(const Matrix& W, const Matrix& A) {
  const Spectrum sw = spectrum(W, tol);
  const Spectrum sa = spectrum(A, tol);
  const Spectrum sk = spectrum(kron(W, A), tol);
  for (Eigen::Index k = 0; k < sk.values.size(); ++k) {
    const Complex lambda = sk.values[k];
    if (std::abs(lambda) <= tol.eig_sep_tol) continue;
    std::vector<std::pair<Complex, Complex>> factorizations;
    for (Eigen::Index i = 0; i < sw.values.size(); ++i)
      for (Eigen::Index j = 0; j < sa.values.size(); ++j)
        if (std::abs(sw.values[i] * sa.values[j] - lambda) < tol.eig_sep_tol) {
          bool duplicate = false;
          for (const auto& [w, a] : factorizations)
            if (std::abs(w - sw.values[i]) < tol.eig_sep_tol &&
                std::abs(a - sa.values[j]) < tol.eig_sep_tol)
              duplicate = true;
          if (!duplicate) factorizations.push_back({sw.values[i], sa.values[j]});
        }
    if (factorizations.size() > 1) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("random WLM satisfies the three defining properties") {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const DirectedGraph g = dobs::testing::random_graph(rng.uniform_int(1, 6), rng);
    const WLM wlm = random_wlm(g, rng.next_u64());
    // make_wlm validated; check the raw facts again here.
    for (int i = 1; i <= g.m; ++i) {
      CHECK(std::abs(wlm.L.row(i - 1).sum()) <= 1e-12);
      for (int j = 1; j <= g.m; ++j) {
        if (i == j) continue;
        if (g.has_edge(i, j))
          CHECK(wlm.L(j - 1, i - 1) < 0);
        else
          CHECK(wlm.L(j - 1, i - 1) == 0.0);
      }
    }
  }
}

TEST_CASE("single vertex WLM is the zero matrix") {
  const WLM wlm = random_wlm(make_graph(1, {}), 3);
  CHECK(wlm.L(0, 0) == 0.0);
}

TEST_CASE("two-cycle WLM has eigenvalues 0 and a+b") {
  const WLM wlm = random_wlm(two_cycle(), 11);
  const double a = -wlm.L(0, 1);
  const double b = -wlm.L(1, 0);
  const Spectrum s = spectrum(wlm.L, tol);
  CHECK(dobs::testing::contains_value({s.values[0], s.values[1]}, Complex(0, 0), 1e-10));
  CHECK(dobs::testing::contains_value({s.values[0], s.values[1]}, Complex(a + b, 0), 1e-10));
}

TEST_CASE("wlm validation rejects broken matrices") {
  const DirectedGraph g = two_cycle();
  Matrix L(2, 2);
  L << 1, -1, -1, 1;
  CHECK_NOTHROW(make_wlm(L, g));
  L(0, 1) = 1;  // edge entry must be negative
  CHECK_THROWS_AS(make_wlm(L, g), std::invalid_argument);
  L << 1, -1, -1, 2;  // row sum broken
  CHECK_THROWS_AS(make_wlm(L, g), std::invalid_argument);
}

TEST_CASE("row rescaling keeps already-simple spectra untouched") {
  const WLM wlm = random_wlm(two_cycle(), 13);
  const WLM rescaled = make_simple_spectrum(wlm, tol, 17);
  CHECK(rescaled.L.isApprox(wlm.L));  // every alpha accepted at 1
}

TEST_CASE("row rescaling produces simple spectra on random graphs") {
  Rng rng(19);
  for (int trial = 0; trial < 15; ++trial) {
    const DirectedGraph g = strongly_connected(rng.uniform_int(2, 5), rng);
    const WLM simple = make_simple_spectrum(random_wlm(g, rng.next_u64()), tol, rng.next_u64());
    const Spectrum s = spectrum(simple.L, tol);
    CHECK(s.all_simple());
    for (Eigen::Index i = 0; i < s.values.size(); ++i)
      for (Eigen::Index j = i + 1; j < s.values.size(); ++j)
        CHECK(std::abs(s.values[i] - s.values[j]) >= tol.eig_sep_tol);
  }
}

TEST_CASE("row rescaling requires strong connectivity") {
  const WLM wlm = random_wlm(make_graph(2, {{1, 2}}), 5);
  CHECK_THROWS_AS(make_simple_spectrum(wlm, tol, 1), std::invalid_argument);
}

TEST_CASE("perron similarity on a single vertex") {
  const WLM wlm = perron_wlm(make_graph(1, {}), 1, PerronMode::Observable, 3, tol);
  CHECK(wlm.L(0, 0) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("perron similarity yields an observable pair") {
  Rng rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = rng.uniform_int(2, 5);
    const DirectedGraph g = strongly_connected(m, rng);
    const int anchor = rng.uniform_int(1, m);
    const WLM wlm = perron_wlm(g, anchor, PerronMode::Observable, rng.next_u64(), tol);

    Matrix stack(m, m);
    Matrix row = Matrix::Zero(1, m);
    row(0, anchor - 1) = 1;
    for (int k = 0; k < m; ++k) {
      stack.row(k) = row;
      row = row * wlm.L;
    }
    CHECK(rank_tol(stack, tol) == m);
    CHECK(wlm.L.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("perron similarity yields a controllable pair") {
  Rng rng(31);
  const DirectedGraph g = two_cycle();
  const WLM wlm = perron_wlm(g, 1, PerronMode::Controllable, rng.next_u64(), tol);
  Matrix stack(2, 2);
  Vector col = Vector::Zero(2);
  col[0] = 1;
  stack.col(0) = col;
  stack.col(1) = wlm.L * col;
  CHECK(rank_tol(stack, tol) == 2);
}

TEST_CASE("alpha scaling: single vertex") {
  const WLM wlm = random_wlm(make_graph(1, {}), 3);
  Matrix A(1, 1);
  A << 1.7;
  const AlphaResult res = choose_alpha(wlm, A, tol, 5);
  CHECK(res.W(0, 0) == Catch::Approx(1.0));
}

TEST_CASE("alpha scaling: nilpotent plant accepts the first draw") {
  const WLM wlm = random_wlm(two_cycle(), 7);
  Matrix A(2, 2);
  A << 0, 1, 0, 0;
  const AlphaResult res = choose_alpha(wlm, A, tol, 9);
  CHECK(res.alpha > 0);
  CHECK(res.W.minCoeff() >= 0);
}

TEST_CASE("alpha scaling produces stochastic matrices with clean products") {
  Rng rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    const DirectedGraph g = strongly_connected(rng.uniform_int(2, 5), rng);
    const WLM wlm = make_simple_spectrum(random_wlm(g, rng.next_u64()), tol, rng.next_u64());
    const Eigen::Index n = rng.uniform_int(1, 3);
    const Matrix A = dobs::testing::random_matrix(n, n, rng);
    const AlphaResult res = choose_alpha(wlm, A, tol, rng.next_u64());
    CHECK(res.W.minCoeff() >= 0.0);
    CHECK((res.W.rowwise().sum().array() - 1).abs().maxCoeff() <= 1e-10);
    CHECK(spectral_radius(res.W) <= 1 + 1e-8);
    CHECK(check_uepp(res.W, A, tol).uepp_pass);
  }
}

TEST_CASE("engineered product collision is flagged at exactly the bad alpha") {
  // L eigenvalues {0, 2}, A modes {2, 3}: (1 - 2a) 3 = 2 at a = 1/6.
  Matrix L(2, 2);
  L << 1, -1, -1, 1;
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 2;
  A(1, 1) = 3;
  const Matrix W_bad = Matrix::Identity(2, 2) - (1.0 / 6.0) * L;
  CHECK(!check_uepp(W_bad, A, tol).uepp_pass);
  const Matrix W_good = Matrix::Identity(2, 2) - 0.21 * L;
  CHECK(check_uepp(W_good, A, tol).uepp_pass);

  const WLM wlm = make_wlm(L, two_cycle());
  const AlphaResult res = choose_alpha(wlm, A, tol, 11);
  CHECK(check_uepp(res.W, A, tol).uepp_pass);
  CHECK(std::abs(res.alpha - 1.0 / 6.0) > 1e-12);
}

TEST_CASE("unique-product check on prescribed spectra") {
  Matrix W1(1, 1);
  W1 << 1;
  CHECK(check_uepp(W1, Matrix::Identity(3, 3), tol).uepp_pass);

  Matrix W = Matrix::Zero(2, 2);
  W(0, 0) = 1;
  W(1, 1) = 0.5;
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 2;
  A(1, 1) = 4;
  const EigCheckReport fail = check_uepp(W, A, tol);  // 1*2 equals 0.5*4
  CHECK(!fail.uepp_pass);
  CHECK(!fail.details.empty());

  A(1, 1) = 5;
  W(1, 1) = 0.3;  // products {2, 5, 0.6, 1.5}
  CHECK(check_uepp(W, A, tol).uepp_pass);
}

TEST_CASE("unique-product check matches exhaustive enumeration") {
  Rng rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index mw = rng.uniform_int(2, 3);
    const Eigen::Index ma = rng.uniform_int(2, 3);
    Matrix W, A;
    if (rng.bernoulli(0.4)) {
      // Diagonal draws from a small value set force frequent collisions.
      W = Matrix::Zero(mw, mw);
      A = Matrix::Zero(ma, ma);
      const double values[4] = {0.5, 1.0, 2.0, 4.0};
      for (Eigen::Index i = 0; i < mw; ++i) W(i, i) = values[rng.uniform_int(0, 3)];
      for (Eigen::Index i = 0; i < ma; ++i) A(i, i) = values[rng.uniform_int(0, 3)];
    } else {
      W = dobs::testing::random_matrix(mw, mw, rng);
      A = dobs::testing::random_matrix(ma, ma, rng);
    }
    CHECK(check_uepp(W, A, tol).uepp_pass == uepp_by_enumeration(W, A));
  }
}

TEST_CASE("eigen-structure verdicts") {
  const EigCheckReport identity = check_p1_p2(Matrix::Identity(2, 2), tol);
  CHECK(!identity.p2_pass);
  CHECK(identity.p1_indeterminate);

  Matrix swap(2, 2);
  swap << 0, 1, 1, 0;  // eigenvectors (1,1)/sqrt2 and (1,-1)/sqrt2
  const EigCheckReport ok = check_p1_p2(swap, tol);
  CHECK(ok.p1_pass);
  CHECK(ok.p2_pass);
  CHECK(ok.details.empty());

  Matrix diag = Matrix::Zero(2, 2);
  diag(0, 0) = 1;
  diag(1, 1) = 2;
  const EigCheckReport p1fail = check_p1_p2(diag, tol);
  CHECK(p1fail.p2_pass);
  CHECK(!p1fail.p1_pass);
  CHECK(!p1fail.details.empty());
}

TEST_CASE("factorization of kronecker eigenvectors, scalar case") {
  Matrix W(1, 1), A(1, 1);
  W << 1;
  A << 2;
  const KronFactorization f = kron_eigvec_factorization(W, A, Complex(2, 0), tol);
  CHECK(std::abs(f.lambda_w - 1.0) < 1e-12);
  CHECK(std::abs(f.lambda_a - 2.0) < 1e-12);
}

TEST_CASE("factorization matches the directly computed eigenvector up to phase") {
  // Symmetric W with eigenvalues {1, 0.2}; A = diag(3, 7); the product 1.4
  // factors uniquely as 0.2 * 7.
  const double c = std::cos(0.5), s = std::sin(0.5);
  Matrix Q(2, 2);
  Q << c, -s, s, c;
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 1;
  D(1, 1) = 0.2;
  const Matrix W = Q * D * Q.transpose();
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 3;
  A(1, 1) = 7;

  const KronFactorization f = kron_eigvec_factorization(W, A, Complex(1.4, 0), tol);
  CHECK(std::abs(f.lambda_w - 0.2) < 1e-9);
  CHECK(std::abs(f.lambda_a - 7.0) < 1e-9);

  const Spectrum sk = spectrum(kron(W, A), tol);
  Eigen::Index direct = -1;
  for (Eigen::Index i = 0; i < sk.values.size(); ++i)
    if (std::abs(sk.values[i] - 1.4) < 1e-9) direct = i;
  REQUIRE(direct >= 0);
  const ComplexVector q = kron(ComplexMatrix(f.v), ComplexMatrix(f.p));
  const double overlap = std::abs((sk.right.col(direct).adjoint() * q)(0, 0));
  CHECK(overlap == Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("factorization rejects broken preconditions") {
  Matrix W = Matrix::Identity(2, 2);
  Matrix A(1, 1);
  A << 2;
  CHECK_THROWS_AS(kron_eigvec_factorization(W, A, Complex(2, 0), tol), std::invalid_argument);

  Matrix W2 = Matrix::Zero(2, 2);
  W2(0, 0) = 1;
  W2(1, 1) = 0.5;
  Matrix A2 = Matrix::Zero(2, 2);
  A2(0, 0) = 2;
  A2(1, 1) = 4;
  CHECK_THROWS_AS(kron_eigvec_factorization(W2, A2, Complex(2, 0), tol), std::invalid_argument);
}

TEST_CASE("weight matrix over a strongly connected graph is one stochastic block") {
  Rng rng(43);
  const DirectedGraph g = strongly_connected(4, rng);
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 1.1;
  A(1, 1) = 0.5;
  const WeightMatrix W = build_weight_matrix(g, A, tol, 47);
  REQUIRE(W.layout.has_value());
  CHECK(W.layout->source_ranges.size() == 1);
  CHECK(W.layout->nonsource_range.first == W.layout->nonsource_range.second);
  CHECK(W.alphas->size() == 1);
  check_weight_consistency(W.W, g);
}

TEST_CASE("weight matrix on the seven-vertex example matches the block template") {
  const DirectedGraph g = make_graph(
      7, {{1, 2}, {2, 1}, {2, 3}, {3, 1}, {3, 5}, {4, 7}, {7, 4}, {5, 6}, {6, 5}, {7, 5}});
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 1.5;
  A(1, 1) = 0.5;
  const WeightMatrix W = build_weight_matrix(g, A, tol, 53);

  REQUIRE(W.layout.has_value());
  const BlockLayout& layout = *W.layout;
  CHECK(layout.permuted_vertices == std::vector<int>{1, 2, 3, 4, 7, 5, 6});
  REQUIRE(layout.source_ranges.size() == 2);
  CHECK(layout.source_ranges[0] == std::pair<int, int>{0, 3});
  CHECK(layout.source_ranges[1] == std::pair<int, int>{3, 5});
  CHECK(layout.nonsource_range == std::pair<int, int>{5, 7});

  auto pw = [&](int i, int j) {
    return W.W(layout.permuted_vertices[static_cast<std::size_t>(i)] - 1,
               layout.permuted_vertices[static_cast<std::size_t>(j)] - 1);
  };
  // Zero blocks are exactly zero.
  for (int i = 0; i < 3; ++i)
    for (int j = 3; j < 7; ++j) CHECK(pw(i, j) == 0.0);
  for (int i = 3; i < 5; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(pw(i, j) == 0.0);
    for (int j = 5; j < 7; ++j) CHECK(pw(i, j) == 0.0);
  }
  // Trailing block is lower triangular with small diagonal: delta * 1.5 < 1.
  CHECK(pw(5, 6) == 0.0);
  CHECK(pw(5, 5) < (1.0 - 1e-6) / 1.5);
  CHECK(pw(6, 6) < (1.0 - 1e-6) / 1.5);

  CHECK((W.W.rowwise().sum().array() - 1).abs().maxCoeff() <= 1e-10);
  check_weight_consistency(W.W, g);
}

TEST_CASE("weight matrix blocks carry simple zero-free spectra and stable tail products") {
  Rng rng(59);
  for (int trial = 0; trial < 8; ++trial) {
    const DirectedGraph g = dobs::testing::random_graph(rng.uniform_int(2, 5), rng);
    const Eigen::Index n = rng.uniform_int(1, 2);
    const Matrix A = dobs::testing::random_matrix(n, n, rng, 1.2);
    const WeightMatrix W = build_weight_matrix(g, A, tol, rng.next_u64());
    check_weight_consistency(W.W, g);
    REQUIRE(W.layout.has_value());
    for (const auto& [lo, hi] : W.layout->source_ranges) {
      Matrix Wb(hi - lo, hi - lo);
      for (int i = lo; i < hi; ++i)
        for (int j = lo; j < hi; ++j)
          Wb(i - lo, j - lo) = W.W(W.layout->permuted_vertices[static_cast<std::size_t>(i)] - 1,
                                   W.layout->permuted_vertices[static_cast<std::size_t>(j)] - 1);
      const EigCheckReport rep = check_p1_p2(Wb, tol);
      CHECK(rep.p1_pass);
      CHECK(rep.p2_pass);
      CHECK(check_uepp(Wb, A, tol).uepp_pass);
    }
  }
}
