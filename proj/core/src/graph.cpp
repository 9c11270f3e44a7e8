#include "gdnlab/graph.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace gdnlab {

AttributedGraph::AttributedGraph(int n, std::vector<Edge> edges, std::vector<Attr> attrs)
    : n_(n), edges_(std::move(edges)), attrs_(std::move(attrs)) {
  if (n_ < 0) throw GraphError("negative node count");
  if (static_cast<int>(attrs_.size()) != n_)
    throw GraphError("attribute count does not match node count");
  d_ = attrs_.empty() ? 0 : static_cast<int>(attrs_[0].size());
  for (const auto& a : attrs_) {
    if (static_cast<int>(a.size()) != d_) throw GraphError("ragged attribute vectors");
  }
  for (const auto& [i, j] : edges_) {
    if (i < 0 || i >= n_ || j < 0 || j >= n_) throw GraphError("edge endpoint out of range");
    if (i == j) throw GraphError("self-loop");
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

  in_adj_.assign(n_, {});
  out_adj_.assign(n_, {});
  for (const auto& [i, j] : edges_) {
    out_adj_[i].push_back(j);
    in_adj_[j].push_back(i);
  }
}

bool AttributedGraph::has_edge(int i, int j) const {
  return std::binary_search(edges_.begin(), edges_.end(), Edge{i, j});
}

const std::vector<int>& AttributedGraph::in_neighbors(int i) const {
  if (i < 0 || i >= n_) throw GraphError("node index out of range");
  return in_adj_[i];
}

const std::vector<int>& AttributedGraph::out_neighbors(int i) const {
  if (i < 0 || i >= n_) throw GraphError("node index out of range");
  return out_adj_[i];
}

bool AttributedGraph::is_symmetric() const {
  for (const auto& [i, j] : edges_) {
    if (!has_edge(j, i)) return false;
  }
  return true;
}

NodePermutation::NodePermutation(std::vector<int> perm) : perm_(std::move(perm)) {
  std::vector<int> sorted = perm_;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < static_cast<int>(sorted.size()); ++i) {
    if (sorted[i] != i) throw GraphError("permutation is not a bijection on 0..n-1");
  }
}

NodePermutation NodePermutation::identity(int n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  return NodePermutation(std::move(p));
}

NodePermutation NodePermutation::inverse() const {
  std::vector<int> inv(perm_.size());
  for (int i = 0; i < size(); ++i) inv[perm_[i]] = i;
  return NodePermutation(std::move(inv));
}

NodePermutation NodePermutation::compose(const NodePermutation& other) const {
  if (size() != other.size()) throw GraphError("permutation size mismatch");
  std::vector<int> out(perm_.size());
  for (int i = 0; i < size(); ++i) out[i] = perm_[other(i)];
  return NodePermutation(std::move(out));
}

AttributedGraph build_graph(int n, const std::vector<Edge>& edges, const std::vector<Attr>& attrs) {
  return AttributedGraph(n, edges, attrs);
}

AttributedGraph permute(const AttributedGraph& g, const NodePermutation& sigma) {
  if (sigma.size() != g.node_count()) throw GraphError("permutation size does not match graph");
  std::vector<Attr> attrs(g.node_count());
  for (int i = 0; i < g.node_count(); ++i) attrs[sigma(i)] = g.attr(i);
  std::vector<Edge> edges;
  edges.reserve(g.edges().size());
  for (const auto& [i, j] : g.edges()) edges.emplace_back(sigma(i), sigma(j));
  return AttributedGraph(g.node_count(), std::move(edges), std::move(attrs));
}

const std::vector<int>& neighbors(const AttributedGraph& g, int i) { return g.in_neighbors(i); }

AttributedGraph make_cycle(int n, const Attr& attr) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    int j = (i + 1) % n;
    if (i == j) continue;
    edges.emplace_back(i, j);
    edges.emplace_back(j, i);
  }
  return AttributedGraph(n, std::move(edges), std::vector<Attr>(n, attr));
}

AttributedGraph make_path(int n, const Attr& attr) {
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) {
    edges.emplace_back(i, i + 1);
    edges.emplace_back(i + 1, i);
  }
  return AttributedGraph(n, std::move(edges), std::vector<Attr>(n, attr));
}

AttributedGraph make_complete(int n, const Attr& attr) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) edges.emplace_back(i, j);
  return AttributedGraph(n, std::move(edges), std::vector<Attr>(n, attr));
}

AttributedGraph make_edgeless(int n, const Attr& attr) {
  return AttributedGraph(n, {}, std::vector<Attr>(n, attr));
}

AttributedGraph disjoint_union(const AttributedGraph& a, const AttributedGraph& b) {
  if (a.attr_dim() != b.attr_dim() && a.node_count() > 0 && b.node_count() > 0)
    throw GraphError("disjoint union of graphs with different attribute dimensions");
  std::vector<Edge> edges = a.edges();
  for (const auto& [i, j] : b.edges()) edges.emplace_back(i + a.node_count(), j + a.node_count());
  std::vector<Attr> attrs = a.attrs();
  attrs.insert(attrs.end(), b.attrs().begin(), b.attrs().end());
  return AttributedGraph(a.node_count() + b.node_count(), std::move(edges), std::move(attrs));
}

AttributedGraph graph_from_mask(const std::vector<std::vector<std::uint8_t>>& adj) {
  int n = static_cast<int>(adj.size());
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(adj[i].size()) != n) throw GraphError("adjacency mask is not square");
    for (int j = 0; j < n; ++j)
      if (adj[i][j] && i != j) edges.emplace_back(i, j);
  }
  return AttributedGraph(n, std::move(edges), std::vector<Attr>(n, Attr{}));
}

NodePermutation random_permutation(int n, Rng& rng) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  rng.shuffle(p);
  return NodePermutation(std::move(p));
}

AttributedGraph random_graph(int n, double edge_prob, int attr_dim, int attr_values, Rng& rng) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && rng.bernoulli(edge_prob)) edges.emplace_back(i, j);
  std::vector<Attr> attrs(n, Attr(attr_dim));
  for (auto& a : attrs)
    for (auto& x : a) x = static_cast<double>(rng.uniform_int(attr_values));
  return AttributedGraph(n, std::move(edges), std::move(attrs));
}

AttributedGraph read_graph(std::istream& in) {
  std::string line;
  auto next_line = [&](std::string& out) {
    while (std::getline(in, line)) {
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      out = line;
      return true;
    }
    return false;
  };

  std::string header;
  if (!next_line(header)) throw GraphError("empty graph file");
  std::istringstream hs(header);
  int n = 0, d = 0;
  if (!(hs >> n >> d)) throw GraphError("bad graph header, expected 'n d'");

  std::vector<Attr> attrs;
  attrs.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::string row;
    if (!next_line(row)) throw GraphError("missing attribute line");
    std::istringstream rs(row);
    Attr a;
    double x;
    while (rs >> x) a.push_back(x);
    if (static_cast<int>(a.size()) != d) throw GraphError("attribute line has wrong dimension");
    attrs.push_back(std::move(a));
  }

  std::vector<Edge> edges;
  std::string row;
  while (next_line(row)) {
    std::istringstream rs(row);
    int i, j;
    if (rs >> i >> j) edges.emplace_back(i, j);
  }
  return AttributedGraph(n, std::move(edges), std::move(attrs));
}

AttributedGraph read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open graph file: " + path);
  return read_graph(in);
}

void write_graph(std::ostream& out, const AttributedGraph& g) {
  out << g.node_count() << ' ' << g.attr_dim() << '\n';
  for (int i = 0; i < g.node_count(); ++i) {
    const Attr& a = g.attr(i);
    for (std::size_t k = 0; k < a.size(); ++k) out << (k ? " " : "") << a[k];
    out << '\n';
  }
  for (const auto& [i, j] : g.edges()) out << i << ' ' << j << '\n';
}

}  // namespace gdnlab
