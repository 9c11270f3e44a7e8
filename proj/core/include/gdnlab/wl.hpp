#pragma once

#include <utility>
#include <vector>

#include "gdnlab/graph.hpp"

namespace gdnlab {

// Node partition at one refinement round. Color ids are contiguous 0..k-1
// and canonical: keys are sorted lexicographically before ids are assigned,
// so equal inputs give identical colorings across runs and platforms.
struct Coloring {
  std::vector<int> colors;
  int round = 0;

  int class_count() const;
};

// sorted (color, count) multiset for one round
using ColorHistogram = std::vector<std::pair<int, int>>;

struct RefinementTrace {
  std::vector<Coloring> colorings;       // round 0 .. stable_round
  std::vector<ColorHistogram> histograms;
  int stable_round = 0;                  // first round whose partition no longer changes

  const Coloring& stable() const { return colorings.back(); }
};

// Color refinement to stabilization (at most n rounds). Round 0 buckets
// nodes by exact attribute-vector equality; each later round recolors by
// (own color, sorted multiset of in-neighbor colors).
RefinementTrace wl_refine(const AttributedGraph& g);

// True iff joint refinement on the disjoint union produces identical
// per-round color histograms for the two sides through stabilization.
bool wl_indistinguishable(const AttributedGraph& g1, const AttributedGraph& g2);

ColorHistogram histogram_of(const std::vector<int>& colors);

}  // namespace gdnlab
