#pragma once

#include <vector>

#include "gdnlab/graph.hpp"
#include "gdnlab/orbits.hpp"

namespace gdnlab {

struct ConstructError : std::runtime_error {
  explicit ConstructError(const std::string& what) : std::runtime_error(what) {}
};

// One multiset of target labels per orbit, kept as a sequence: the element a
// node receives is indexed by its counter value at claim time.
struct OrbitTargets {
  std::vector<std::vector<double>> per_orbit;
};

// Per-node working tuple of the assignment procedure.
struct NodeLedger {
  double tie_break = 0.0;
  int orbit = -1;
  int counter = 0;
  bool assigned = false;
  double label = 0.0;
};

struct AssignmentResult {
  std::vector<double> labels;
  std::vector<int> claim_order;  // node claimed in round t
  std::vector<double> tie_breaks;
};

// n rounds; each round a global readout finds the largest tie-break value,
// the owner claims its orbit's target at its current counter, zeroes itself
// out, and every other node in that orbit bumps its counter.
AssignmentResult assign_labels_with_ties(const AttributedGraph& g, const OrbitTargets& targets,
                                         const std::vector<double>& tie_breaks);

// Tie-break values sampled uniform on (0, 1); ties have probability zero and
// are resampled if they ever occur.
AssignmentResult assign_labels_rni(const AttributedGraph& g, const OrbitTargets& targets,
                                   Rng& rng);

// Deterministic variant: the agent index is the tie-break value, so within
// each orbit the highest index claims the earliest target position.
AssignmentResult assign_labels_uid(const AttributedGraph& g, const OrbitTargets& targets);

// Vector-valued targets run the same claim order componentwise.
struct VectorOrbitTargets {
  std::vector<std::vector<std::vector<double>>> per_orbit;
};
std::vector<std::vector<double>> assign_vector_labels_rni(const AttributedGraph& g,
                                                          const VectorOrbitTargets& targets,
                                                          Rng& rng);

// True iff |a| == |b| and some bijection matches every element within eps;
// for scalars the sorted matching is optimal.
bool multiset_eps_equal(std::vector<double> a, std::vector<double> b, double eps);

}  // namespace gdnlab
