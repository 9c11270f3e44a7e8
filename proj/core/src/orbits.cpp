#include "gdnlab/orbits.hpp"

#include <algorithm>
#include <numeric>

#include "gdnlab/wl.hpp"

namespace gdnlab {

namespace {

// Backtracking search for color-respecting bijections between two graphs
// (or one graph with itself). Edges are checked incrementally against every
// already-mapped node, so complete assignments are isomorphisms.
struct MappingSearch {
  const AttributedGraph& a;
  const AttributedGraph& b;
  const std::vector<int>& color_a;  // comparable color spaces
  const std::vector<int>& color_b;
  bool collect_all;
  std::vector<NodePermutation> found;

  std::vector<int> image;
  std::vector<bool> used;

  MappingSearch(const AttributedGraph& a_, const AttributedGraph& b_,
                const std::vector<int>& ca, const std::vector<int>& cb, bool all)
      : a(a_), b(b_), color_a(ca), color_b(cb), collect_all(all) {
    image.assign(a.node_count(), -1);
    used.assign(b.node_count(), false);
  }

  bool compatible(int i, int j) const {
    if (color_a[i] != color_b[j]) return false;
    if (a.attr(i) != b.attr(j)) return false;
    for (int k = 0; k < i; ++k) {
      if (a.has_edge(i, k) != b.has_edge(j, image[k])) return false;
      if (a.has_edge(k, i) != b.has_edge(image[k], j)) return false;
    }
    return true;
  }

  // returns true when a mapping was found and the search may stop
  bool search(int i) {
    if (i == a.node_count()) {
      if (collect_all) found.emplace_back(image);
      return !collect_all;
    }
    for (int j = 0; j < b.node_count(); ++j) {
      if (used[j] || !compatible(i, j)) continue;
      image[i] = j;
      used[j] = true;
      if (search(i + 1)) return true;
      used[j] = false;
      image[i] = -1;
    }
    return false;
  }
};

}  // namespace

std::vector<NodePermutation> automorphisms(const AttributedGraph& g) {
  if (g.node_count() > kOrbitNodeBudget)
    throw BudgetExceeded("automorphism search capped at n <= 10");
  const std::vector<int> colors = wl_refine(g).stable().colors;
  MappingSearch search(g, g, colors, colors, /*all=*/true);
  search.search(0);
  return std::move(search.found);
}

OrbitPartition orbit_partition(const AttributedGraph& g) {
  const int n = g.node_count();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const NodePermutation& sigma : automorphisms(g)) {
    for (int i = 0; i < n; ++i) {
      int ra = find(i), rb = find(sigma(i));
      if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
  }
  OrbitPartition part;
  part.orbit_of.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    int root = find(i);
    if (part.orbit_of[root] == -1) {
      part.orbit_of[root] = static_cast<int>(part.orbits.size());
      part.orbits.push_back({});
    }
    part.orbit_of[i] = part.orbit_of[root];
    part.orbits[part.orbit_of[i]].push_back(i);
  }
  return part;
}

bool are_similar(const AttributedGraph& g, int i, int j) {
  if (i < 0 || i >= g.node_count() || j < 0 || j >= g.node_count())
    throw GraphError("node index out of range");
  if (i == j) return true;
  const OrbitPartition part = orbit_partition(g);
  return part.orbit_of[i] == part.orbit_of[j];
}

bool is_isomorphic(const AttributedGraph& g1, const AttributedGraph& g2) {
  if (g1.node_count() != g2.node_count()) return false;
  if (g1.edges().size() != g2.edges().size()) return false;
  if (g1.node_count() > kOrbitNodeBudget)
    throw BudgetExceeded("isomorphism search capped at n <= 10");
  std::vector<Attr> a1 = g1.attrs(), a2 = g2.attrs();
  std::sort(a1.begin(), a1.end());
  std::sort(a2.begin(), a2.end());
  if (a1 != a2) return false;

  // joint refinement keeps the color ids comparable between the two graphs
  const AttributedGraph joint = disjoint_union(g1, g2);
  const std::vector<int> joint_colors = wl_refine(joint).stable().colors;
  const int n = g1.node_count();
  std::vector<int> c1(joint_colors.begin(), joint_colors.begin() + n);
  std::vector<int> c2(joint_colors.begin() + n, joint_colors.end());
  if (histogram_of(c1) != histogram_of(c2)) return false;

  MappingSearch search(g1, g2, c1, c2, /*all=*/false);
  return search.search(0);
}

}  // namespace gdnlab
