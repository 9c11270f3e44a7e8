#pragma once

#include <stdexcept>
#include <vector>

#include "gdnlab/graph.hpp"

namespace gdnlab {

struct BudgetExceeded : std::runtime_error {
  explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

// hard cap for the brute-force search; every environment in scope has <= 10 agents
inline constexpr int kOrbitNodeBudget = 10;

struct OrbitPartition {
  std::vector<int> orbit_of;            // per-node orbit id, contiguous 0..k-1
  std::vector<std::vector<int>> orbits; // sorted node sets

  int orbit_count() const { return static_cast<int>(orbits.size()); }
};

// All permutations sigma with permute(g, sigma) == g (attributes included).
// Candidates are pruned by the WL stable coloring. Throws BudgetExceeded for
// n > kOrbitNodeBudget.
std::vector<NodePermutation> automorphisms(const AttributedGraph& g);

// i and j share an orbit iff some automorphism maps i to j.
OrbitPartition orbit_partition(const AttributedGraph& g);

bool are_similar(const AttributedGraph& g, int i, int j);

// Exact isomorphism by backtracking over joint-WL color classes.
bool is_isomorphic(const AttributedGraph& g1, const AttributedGraph& g2);

}  // namespace gdnlab
