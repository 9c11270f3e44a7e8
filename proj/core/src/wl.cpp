#include "gdnlab/wl.hpp"

#include <algorithm>
#include <map>

namespace gdnlab {

int Coloring::class_count() const {
  int k = 0;
  for (int c : colors) k = std::max(k, c + 1);
  return k;
}

ColorHistogram histogram_of(const std::vector<int>& colors) {
  std::map<int, int> counts;
  for (int c : colors) ++counts[c];
  return ColorHistogram(counts.begin(), counts.end());
}

namespace {

std::vector<int> initial_colors(const AttributedGraph& g) {
  std::vector<Attr> keys = g.attrs();
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  std::vector<int> colors(g.node_count());
  for (int i = 0; i < g.node_count(); ++i) {
    colors[i] = static_cast<int>(
        std::lower_bound(keys.begin(), keys.end(), g.attr(i)) - keys.begin());
  }
  return colors;
}

std::vector<int> refine_once(const AttributedGraph& g, const std::vector<int>& colors) {
  using Key = std::pair<int, std::vector<int>>;  // (own color, sorted neighbor colors)
  std::vector<Key> keys(g.node_count());
  for (int i = 0; i < g.node_count(); ++i) {
    std::vector<int> nb;
    nb.reserve(g.in_neighbors(i).size());
    for (int j : g.in_neighbors(i)) nb.push_back(colors[j]);
    std::sort(nb.begin(), nb.end());
    keys[i] = {colors[i], std::move(nb)};
  }
  std::vector<Key> sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<int> next(g.node_count());
  for (int i = 0; i < g.node_count(); ++i) {
    next[i] = static_cast<int>(
        std::lower_bound(sorted.begin(), sorted.end(), keys[i]) - sorted.begin());
  }
  return next;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  // both are canonical contiguous ids, so partitions match iff the maps
  // between ids are consistent in both directions
  std::map<int, int> fwd, bwd;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [it1, ins1] = fwd.emplace(a[i], b[i]);
    if (!ins1 && it1->second != b[i]) return false;
    auto [it2, ins2] = bwd.emplace(b[i], a[i]);
    if (!ins2 && it2->second != a[i]) return false;
  }
  return true;
}

}  // namespace

RefinementTrace wl_refine(const AttributedGraph& g) {
  RefinementTrace trace;
  std::vector<int> colors = initial_colors(g);
  trace.colorings.push_back({colors, 0});
  trace.histograms.push_back(histogram_of(colors));
  for (int round = 1; round <= g.node_count(); ++round) {
    std::vector<int> next = refine_once(g, colors);
    if (same_partition(colors, next)) {
      trace.stable_round = round - 1;
      return trace;
    }
    colors = std::move(next);
    trace.colorings.push_back({colors, round});
    trace.histograms.push_back(histogram_of(colors));
  }
  trace.stable_round = static_cast<int>(trace.colorings.size()) - 1;
  return trace;
}

bool wl_indistinguishable(const AttributedGraph& g1, const AttributedGraph& g2) {
  if (g1.node_count() != g2.node_count()) return false;
  if (g1.node_count() > 0 && g2.node_count() > 0 && g1.attr_dim() != g2.attr_dim()) return false;
  const AttributedGraph joint = disjoint_union(g1, g2);
  const RefinementTrace trace = wl_refine(joint);
  const int n1 = g1.node_count();
  for (const Coloring& coloring : trace.colorings) {
    std::vector<int> left(coloring.colors.begin(), coloring.colors.begin() + n1);
    std::vector<int> right(coloring.colors.begin() + n1, coloring.colors.end());
    if (histogram_of(left) != histogram_of(right)) return false;
  }
  return true;
}

}  // namespace gdnlab
