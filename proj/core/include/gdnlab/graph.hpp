#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gdnlab/rng.hpp"

namespace gdnlab {

struct GraphError : std::runtime_error {
  explicit GraphError(const std::string& what) : std::runtime_error(what) {}
};

using Edge = std::pair<int, int>;
using Attr = std::vector<double>;

// Directed graph with per-node real-vector attributes. Immutable after
// construction; node identity is the 0-based index.
class AttributedGraph {
 public:
  AttributedGraph() = default;
  AttributedGraph(int n, std::vector<Edge> edges, std::vector<Attr> attrs);

  int node_count() const { return n_; }
  int attr_dim() const { return d_; }
  const std::vector<Edge>& edges() const { return edges_; }  // sorted, deduplicated
  const Attr& attr(int i) const { return attrs_[i]; }
  const std::vector<Attr>& attrs() const { return attrs_; }

  bool has_edge(int i, int j) const;

  // nodes j with an edge (j, i); these feed node i's aggregation
  const std::vector<int>& in_neighbors(int i) const;
  const std::vector<int>& out_neighbors(int i) const;

  bool is_symmetric() const;

  friend bool operator==(const AttributedGraph& a, const AttributedGraph& b) {
    return a.n_ == b.n_ && a.d_ == b.d_ && a.edges_ == b.edges_ && a.attrs_ == b.attrs_;
  }

 private:
  int n_ = 0;
  int d_ = 0;
  std::vector<Edge> edges_;
  std::vector<Attr> attrs_;
  std::vector<std::vector<int>> in_adj_;
  std::vector<std::vector<int>> out_adj_;
};

// Bijection on {0..n-1}; perm()[i] is the image of node i.
class NodePermutation {
 public:
  NodePermutation() = default;
  explicit NodePermutation(std::vector<int> perm);

  static NodePermutation identity(int n);

  int size() const { return static_cast<int>(perm_.size()); }
  int operator()(int i) const { return perm_[i]; }
  const std::vector<int>& perm() const { return perm_; }

  NodePermutation inverse() const;
  // (a.compose(b))(i) == a(b(i))
  NodePermutation compose(const NodePermutation& other) const;

  friend bool operator==(const NodePermutation& a, const NodePermutation& b) = default;

 private:
  std::vector<int> perm_;
};

AttributedGraph build_graph(int n, const std::vector<Edge>& edges, const std::vector<Attr>& attrs);

// Node sigma(i) of the result carries node i's attributes; edge (i, j) maps
// to (sigma(i), sigma(j)).
AttributedGraph permute(const AttributedGraph& g, const NodePermutation& sigma);

const std::vector<int>& neighbors(const AttributedGraph& g, int i);

// Builders used by fixtures and the environments.
AttributedGraph make_cycle(int n, const Attr& attr = {0.0});          // symmetric edges
AttributedGraph make_path(int n, const Attr& attr = {0.0});           // symmetric edges
AttributedGraph make_complete(int n, const Attr& attr = {0.0});       // symmetric edges
AttributedGraph make_edgeless(int n, const Attr& attr = {0.0});
AttributedGraph disjoint_union(const AttributedGraph& a, const AttributedGraph& b);
AttributedGraph graph_from_mask(const std::vector<std::vector<std::uint8_t>>& adj);  // attr dim 0

NodePermutation random_permutation(int n, Rng& rng);
AttributedGraph random_graph(int n, double edge_prob, int attr_dim, int attr_values, Rng& rng);

// Text fixture format: "n d" line, n attribute lines of d reals, then one
// "i j" line per directed edge.
AttributedGraph read_graph(std::istream& in);
AttributedGraph read_graph_file(const std::string& path);
void write_graph(std::ostream& out, const AttributedGraph& g);

}  // namespace gdnlab
