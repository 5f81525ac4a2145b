#pragma once

#include <algorithm>
#include <cassert>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dobs {

// Directed communication graph on vertices 1..m. An edge (i, j) means
// information flows from i to j. Self-loops are rejected at construction.
struct DirectedGraph {
  int m = 0;
  std::set<std::pair<int, int>> edges;

  bool has_edge(int from, int to) const { return edges.count({from, to}) > 0; }
};

inline DirectedGraph make_graph(int m, const std::set<std::pair<int, int>>& edges) {
  if (m < 1) throw std::invalid_argument("graph: vertex count must be >= 1");
  for (const auto& [a, b] : edges) {
    if (a == b) throw std::invalid_argument("graph: self-loop on vertex " + std::to_string(a));
    if (a < 1 || a > m || b < 1 || b > m)
      throw std::invalid_argument("graph: edge (" + std::to_string(a) + "," + std::to_string(b) +
                                  ") outside 1.." + std::to_string(m));
  }
  return DirectedGraph{m, edges};
}

// N_i = {i} plus every vertex with an edge into i; entry v-1 of the result
// holds N_v.
inline std::vector<std::set<int>> neighborhoods(const DirectedGraph& g) {
  std::vector<std::set<int>> nbhd(static_cast<std::size_t>(g.m));
  for (int v = 1; v <= g.m; ++v) nbhd[static_cast<std::size_t>(v - 1)].insert(v);
  for (const auto& [from, to] : g.edges) nbhd[static_cast<std::size_t>(to - 1)].insert(from);
  return nbhd;
}

namespace detail {

struct TarjanState {
  const DirectedGraph* g = nullptr;
  std::vector<std::vector<int>> out;  // out[v-1]: sorted out-neighbors
  std::vector<int> index, lowlink;
  std::vector<bool> on_stack;
  std::vector<int> stack;
  int next_index = 0;
  std::vector<std::vector<int>> components;

  void strongconnect(int v) {
    index[static_cast<std::size_t>(v - 1)] = lowlink[static_cast<std::size_t>(v - 1)] = next_index++;
    stack.push_back(v);
    on_stack[static_cast<std::size_t>(v - 1)] = true;
    for (int w : out[static_cast<std::size_t>(v - 1)]) {
      if (index[static_cast<std::size_t>(w - 1)] < 0) {
        strongconnect(w);
        lowlink[static_cast<std::size_t>(v - 1)] =
            std::min(lowlink[static_cast<std::size_t>(v - 1)], lowlink[static_cast<std::size_t>(w - 1)]);
      } else if (on_stack[static_cast<std::size_t>(w - 1)]) {
        lowlink[static_cast<std::size_t>(v - 1)] =
            std::min(lowlink[static_cast<std::size_t>(v - 1)], index[static_cast<std::size_t>(w - 1)]);
      }
    }
    if (lowlink[static_cast<std::size_t>(v - 1)] == index[static_cast<std::size_t>(v - 1)]) {
      std::vector<int> component;
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[static_cast<std::size_t>(w - 1)] = false;
        component.push_back(w);
      } while (w != v);
      std::sort(component.begin(), component.end());
      components.push_back(std::move(component));
    }
  }
};

}  // namespace detail

// Maximal strongly connected components; deterministic (vertices visited in
// ascending label order), each component sorted, components ordered by their
// smallest vertex.
inline std::vector<std::vector<int>> strongly_connected_components(const DirectedGraph& g) {
  detail::TarjanState t;
  t.g = &g;
  t.out.assign(static_cast<std::size_t>(g.m), {});
  for (const auto& [from, to] : g.edges) t.out[static_cast<std::size_t>(from - 1)].push_back(to);
  for (auto& list : t.out) std::sort(list.begin(), list.end());
  t.index.assign(static_cast<std::size_t>(g.m), -1);
  t.lowlink.assign(static_cast<std::size_t>(g.m), -1);
  t.on_stack.assign(static_cast<std::size_t>(g.m), false);
  for (int v = 1; v <= g.m; ++v)
    if (t.index[static_cast<std::size_t>(v - 1)] < 0) t.strongconnect(v);
  std::sort(t.components.begin(), t.components.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return t.components;
}

// A strongly connected component with no edge entering it from outside.
struct SourceComponent {
  std::vector<int> vertices;                    // sorted
  std::vector<std::pair<int, int>> internal_edges;
};

inline std::vector<SourceComponent> source_components(const DirectedGraph& g) {
  const auto sccs = strongly_connected_components(g);
  std::vector<int> component_of(static_cast<std::size_t>(g.m), -1);
  for (std::size_t c = 0; c < sccs.size(); ++c)
    for (int v : sccs[c]) component_of[static_cast<std::size_t>(v - 1)] = static_cast<int>(c);

  std::vector<bool> has_incoming(sccs.size(), false);
  for (const auto& [from, to] : g.edges) {
    const int cf = component_of[static_cast<std::size_t>(from - 1)];
    const int ct = component_of[static_cast<std::size_t>(to - 1)];
    if (cf != ct) has_incoming[static_cast<std::size_t>(ct)] = true;
  }

  std::vector<SourceComponent> sources;
  for (std::size_t c = 0; c < sccs.size(); ++c) {
    if (has_incoming[c]) continue;
    SourceComponent sc;
    sc.vertices = sccs[c];
    for (const auto& e : g.edges) {
      const bool from_in = std::binary_search(sc.vertices.begin(), sc.vertices.end(), e.first);
      const bool to_in = std::binary_search(sc.vertices.begin(), sc.vertices.end(), e.second);
      if (from_in && to_in) sc.internal_edges.push_back(e);
    }
    sources.push_back(std::move(sc));
  }
  return sources;  // every graph has at least one
}

// Directed trees whose union covers the non-source vertices; every covered
// vertex is reachable from its root inside the tree, and every root has an
// in-edge from a source component.
struct RootedTree {
  int root = 0;
  std::map<int, int> parent;  // child -> parent, root excluded
};

struct RootedForest {
  std::vector<RootedTree> trees;
  std::set<int> covered;
  std::vector<int> order;  // construction order; parents precede children
};

// Multi-source BFS from all source-component vertices. Each discovered
// non-source vertex attaches to its discoverer; vertices discovered directly
// from a source become roots. Ties break toward the lowest vertex label, so
// the result is deterministic.
inline RootedForest rooted_forest_over_nonsource(const DirectedGraph& g,
                                                 const std::vector<SourceComponent>& sources) {
  std::set<int> source_vertices;
  for (const auto& sc : sources) source_vertices.insert(sc.vertices.begin(), sc.vertices.end());

  std::vector<std::vector<int>> out(static_cast<std::size_t>(g.m));
  for (const auto& [from, to] : g.edges) out[static_cast<std::size_t>(from - 1)].push_back(to);
  for (auto& list : out) std::sort(list.begin(), list.end());

  RootedForest forest;
  std::map<int, int> parent_of;   // discovered non-source vertex -> discoverer
  std::map<int, int> root_of;     // discovered non-source vertex -> its tree root
  std::queue<int> frontier;
  for (int v : source_vertices) frontier.push(v);

  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int w : out[static_cast<std::size_t>(u - 1)]) {
      if (source_vertices.count(w) || forest.covered.count(w)) continue;
      forest.covered.insert(w);
      forest.order.push_back(w);
      if (source_vertices.count(u)) {
        root_of[w] = w;
      } else {
        parent_of[w] = u;
        root_of[w] = root_of[u];
      }
      frontier.push(w);
    }
  }

  // Every non-source vertex is reachable from a source; a gap here would mean
  // the source decomposition is wrong.
  assert(static_cast<int>(forest.covered.size() + source_vertices.size()) == g.m);

  std::map<int, RootedTree> trees;
  for (int v : forest.order) {
    const int r = root_of[v];
    trees[r].root = r;
    if (v != r) trees[r].parent[v] = parent_of[v];
  }
  for (auto& [root, tree] : trees) forest.trees.push_back(tree);
  return forest;
}

}  // namespace dobs
