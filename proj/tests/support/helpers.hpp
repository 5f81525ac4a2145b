#pragma once

#include <set>
#include <vector>

#include "dobs/graph.hpp"
#include "dobs/numerics.hpp"
#include "dobs/rng.hpp"

namespace dobs::testing {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double amp = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = amp * rng.gaussian();
  return m;
}

inline DirectedGraph random_graph(int m, Rng& rng, double edge_prob = 0.4) {
  std::set<std::pair<int, int>> edges;
  for (int i = 1; i <= m; ++i)
    for (int j = 1; j <= m; ++j)
      if (i != j && rng.bernoulli(edge_prob)) edges.insert({i, j});
  return make_graph(m, edges);
}

inline bool contains_value(const std::vector<Complex>& values, Complex target, double tol) {
  for (const Complex& v : values)
    if (std::abs(v - target) < tol) return true;
  return false;
}

}  // namespace dobs::testing
