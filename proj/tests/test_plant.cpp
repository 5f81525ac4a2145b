#include <catch_amalgamated.hpp>

#include "dobs/oracles.hpp"
#include "dobs/plant.hpp"
#include "support/helpers.hpp"

using namespace dobs;

namespace {
const Tolerances tol;

Matrix row2(double a, double b) {
  Matrix h(1, 2);
  h << a, b;
  return h;
}
}  // namespace

TEST_CASE("plant validation") {
  Matrix A = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(make_plant(A, {Matrix::Zero(1, 3)}), std::invalid_argument);
  CHECK_THROWS_AS(make_plant(A, {}), std::invalid_argument);
  CHECK_THROWS_AS(make_plant(A, {Matrix::Zero(1, 2)}, {{Matrix::Zero(3, 1)}}),
                  std::invalid_argument);
}

TEST_CASE("output stacking") {
  Matrix A = Matrix::Identity(2, 2);
  std::vector<Matrix> H{row2(1, 0), Matrix::Zero(2, 2), row2(0, 1)};
  H[1] << 1, 2, 3, 4;
  const Plant p = make_plant(A, H);

  const Matrix full = stack_H(p, make_selection({1, 2, 3}, 3));
  CHECK(full.rows() == 4);
  CHECK(full.topRows(1).isApprox(H[0]));
  CHECK(full.middleRows(1, 2).isApprox(H[1]));
  CHECK(full.bottomRows(1).isApprox(H[2]));

  const Matrix empty = stack_H(p, make_selection({}, 3));
  CHECK(empty.rows() == 0);
  CHECK(empty.cols() == 2);

  // r = (1, 2, 1), J = {1, 3} -> rows of blocks 1 then 3.
  const Matrix pair = stack_H(p, make_selection({1, 3}, 3));
  CHECK(pair.rows() == 2);
  CHECK(pair.topRows(1).isApprox(H[0]));
  CHECK(pair.bottomRows(1).isApprox(H[2]));
}

TEST_CASE("input stacking") {
  Matrix A = Matrix::Identity(2, 2);
  std::vector<Matrix> H{row2(1, 0), row2(0, 1)};
  std::vector<Matrix> B{Matrix::Zero(2, 1), Matrix::Zero(2, 1)};
  B[0] << 1, 2;
  B[1] << 3, 4;
  const Plant p = make_plant(A, H, B);

  CHECK(stack_B(p, make_selection({1, 2}, 2)).cols() == 2);
  CHECK(stack_B(p, make_selection({}, 2)).cols() == 0);
  CHECK(stack_B(p, make_selection({2}, 2)).isApprox(B[1]));

  const Plant no_inputs = make_plant(A, H);
  CHECK_THROWS_AS(stack_B(no_inputs, make_selection({1}, 2)), std::invalid_argument);
}

TEST_CASE("selection validation") {
  CHECK_THROWS_AS(make_selection({2, 1}, 3), std::invalid_argument);
  CHECK_THROWS_AS(make_selection({0}, 3), std::invalid_argument);
  CHECK_THROWS_AS(make_selection({4}, 3), std::invalid_argument);
}

TEST_CASE("detectability by rank test") {
  // Stable plant: nothing to observe.
  CHECK(is_detectable(0.5 * Matrix::Identity(3, 3), Matrix(0, 3), tol).ok);

  // Unstable scalar with no measurement.
  Matrix a1(1, 1);
  a1 << 2;
  const PbhResult fail = is_detectable(a1, Matrix(0, 1), tol);
  CHECK(!fail.ok);
  REQUIRE(fail.witness.has_value());
  CHECK(std::abs(*fail.witness - 2.0) < 1e-9);

  // diag(2, 0.5) with H = [1 0]: the stack at 2 is [[0,0],[0,-1.5],[1,0]], rank 2.
  Matrix a2 = Matrix::Zero(2, 2);
  a2(0, 0) = 2;
  a2(1, 1) = 0.5;
  CHECK(is_detectable(a2, row2(1, 0), tol).ok);
  CHECK(!is_detectable(a2, row2(0, 1), tol).ok);
}

TEST_CASE("stabilizability by rank test") {
  CHECK(is_stabilizable(0.5 * Matrix::Identity(2, 2), Matrix(2, 0), tol).ok);

  Matrix a1(1, 1);
  a1 << 2;
  const PbhResult fail = is_stabilizable(a1, Matrix::Zero(1, 1), tol);
  CHECK(!fail.ok);
  REQUIRE(fail.witness.has_value());
  CHECK(std::abs(*fail.witness - 2.0) < 1e-9);

  // diag(2, 3) with b = [1; 1]: full rank at both unstable modes, by hand.
  Matrix a2 = Matrix::Zero(2, 2);
  a2(0, 0) = 2;
  a2(1, 1) = 3;
  Matrix b(2, 1);
  b << 1, 1;
  CHECK(is_stabilizable(a2, b, tol).ok);
}

TEST_CASE("complex unstable pairs go through the real embedding") {
  // Rotation scaled to radius 1.3: eigenvalues 1.3 * exp(+/- i pi/2).
  Matrix a(2, 2);
  a << 0, 1.3, -1.3, 0;
  CHECK(is_detectable(a, row2(1, 0), tol).ok);
  CHECK(!is_detectable(a, Matrix(0, 2), tol).ok);
}

TEST_CASE("omniscience condition on the seven-vertex example") {
  const DirectedGraph g = make_graph(
      7, {{1, 2}, {2, 1}, {2, 3}, {3, 1}, {3, 5}, {4, 7}, {7, 4}, {5, 6}, {6, 5}, {7, 5}});
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 1.2;
  A(1, 1) = 0.8;
  std::vector<Matrix> H{row2(1, 0), row2(0, 1), row2(0, 0), row2(1, 1),
                        row2(0, 0), row2(1, 0), row2(0, 1)};
  const Plant p = make_plant(A, H);
  const auto report = omniscience_condition(p, g, tol);
  CHECK(report.holds);
  REQUIRE(report.components.size() == 2);
  CHECK(report.components[0].vertices == std::vector<int>{1, 2, 3});
  CHECK(report.components[1].vertices == std::vector<int>{4, 7});
}

TEST_CASE("stable plant satisfies the condition on any graph") {
  Rng rng(97);
  for (int trial = 0; trial < 10; ++trial) {
    const DirectedGraph g = dobs::testing::random_graph(rng.uniform_int(1, 5), rng);
    std::vector<Matrix> H(static_cast<std::size_t>(g.m), Matrix(0, 2));
    const Plant p = make_plant(0.7 * Matrix::Identity(2, 2), H);
    CHECK(omniscience_condition(p, g, tol).holds);
  }
}

TEST_CASE("condition fails when a source component misses an unstable mode") {
  // Source {1} sees only the first coordinate; mode 3 is invisible there.
  const DirectedGraph g = make_graph(2, {{1, 2}});
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 2;
  A(1, 1) = 3;
  const Plant p = make_plant(A, {row2(1, 0), row2(0, 1)});
  const auto report = omniscience_condition(p, g, tol);
  CHECK(!report.holds);
  REQUIRE(report.components.size() == 1);
  CHECK(report.components[0].vertices == std::vector<int>{1});
  REQUIRE(report.components[0].witness.has_value());
  CHECK(std::abs(*report.components[0].witness - 3.0) < 1e-9);
}

TEST_CASE("condition over a strongly connected graph reduces to full-stack detectability") {
  Rng rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = rng.uniform_int(2, 4);
    std::set<std::pair<int, int>> edges;
    for (int i = 1; i <= m; ++i) edges.insert({i, i % m + 1});
    const DirectedGraph g = make_graph(m, edges);
    const Matrix A = dobs::testing::random_matrix(2, 2, rng, 1.2);
    std::vector<Matrix> H;
    for (int i = 0; i < m; ++i) H.push_back(dobs::testing::random_matrix(rng.uniform_int(0, 1), 2, rng));
    const Plant p = make_plant(A, H);
    std::vector<int> all;
    for (int v = 1; v <= m; ++v) all.push_back(v);
    const bool full = is_detectable(A, stack_H(p, make_selection(all, m)), tol).ok;
    CHECK(omniscience_condition(p, g, tol).holds == full);
  }
}

TEST_CASE("detectability is monotone in the output set") {
  Rng rng(103);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = rng.uniform_int(1, 3);
    const Matrix A = dobs::testing::random_matrix(n, n, rng, 1.3);
    const Matrix H1 = dobs::testing::random_matrix(rng.uniform_int(0, 2), n, rng);
    const Matrix H2 = dobs::testing::random_matrix(rng.uniform_int(0, 2), n, rng);
    Matrix both(H1.rows() + H2.rows(), n);
    both.topRows(H1.rows()) = H1;
    both.bottomRows(H2.rows()) = H2;
    if (is_detectable(A, H1, tol).ok) CHECK(is_detectable(A, both, tol).ok);
  }
}

TEST_CASE("rank test agrees with the unobservable-subspace oracle") {
  Rng rng(107);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = rng.uniform_int(1, 4);
    Matrix A;
    if (rng.bernoulli(0.5)) {
      A = Matrix::Zero(n, n);
      for (int i = 0; i < n; ++i)
        A(i, i) = rng.bernoulli(0.5) ? rng.uniform(1.0, 2.0) : rng.uniform(0.2, 0.9);
    } else {
      A = dobs::testing::random_matrix(n, n, rng, 1.1);
    }
    const int r = rng.uniform_int(0, 2);
    Matrix H = Matrix::Zero(r, n);
    for (int row = 0; row < r; ++row) {
      if (rng.bernoulli(0.5))
        H(row, rng.uniform_int(0, n - 1)) = rng.uniform(0.5, 2.0);
      else
        for (int col = 0; col < n; ++col) H(row, col) = rng.gaussian();
    }
    CHECK(is_detectable(A, H, tol).ok == oracles::oracle_detectability(A, H, tol));
    ++checked;
  }
  CHECK(checked == 200);
}
