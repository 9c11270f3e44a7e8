#include "gdnlab/construct.hpp"

#include <algorithm>
#include <cmath>

namespace gdnlab {

namespace {

constexpr double kClaimed = -1e300;

void check_targets(const OrbitPartition& part, const OrbitTargets& targets) {
  if (static_cast<int>(targets.per_orbit.size()) != part.orbit_count())
    throw ConstructError("target multiset count does not match orbit count");
  for (int k = 0; k < part.orbit_count(); ++k) {
    if (targets.per_orbit[k].size() != part.orbits[k].size())
      throw ConstructError("target multiset size does not match orbit size");
    for (double v : targets.per_orbit[k])
      if (!std::isfinite(v)) throw ConstructError("target labels must be finite");
  }
}

// Claim order is a pure function of the tie-break values and the orbit
// partition; both label flavors and the vector variant reuse it.
std::vector<int> run_claims(const OrbitPartition& part, std::vector<double> tie,
                            std::vector<int>& counters_out) {
  const int n = static_cast<int>(tie.size());
  std::vector<int> counters(n, 0);
  std::vector<int> order;
  order.reserve(n);
  for (int round = 0; round < n; ++round) {
    int winner = 0;
    for (int i = 1; i < n; ++i)
      if (tie[i] > tie[winner]) winner = i;
    order.push_back(winner);
    tie[winner] = kClaimed;
    for (int i = 0; i < n; ++i)
      if (i != winner && part.orbit_of[i] == part.orbit_of[winner]) ++counters[i];
  }
  counters_out = std::move(counters);
  return order;
}

}  // namespace

AssignmentResult assign_labels_with_ties(const AttributedGraph& g, const OrbitTargets& targets,
                                         const std::vector<double>& tie_breaks) {
  const int n = g.node_count();
  if (static_cast<int>(tie_breaks.size()) != n)
    throw ConstructError("one tie-break value per node required");
  const OrbitPartition part = orbit_partition(g);
  check_targets(part, targets);

  std::vector<NodeLedger> ledger(n);
  for (int i = 0; i < n; ++i) {
    ledger[i].tie_break = tie_breaks[i];
    ledger[i].orbit = part.orbit_of[i];
  }

  AssignmentResult result;
  result.tie_breaks = tie_breaks;
  result.labels.assign(n, 0.0);
  result.claim_order.reserve(n);
  for (int round = 0; round < n; ++round) {
    int winner = 0;
    for (int i = 1; i < n; ++i)
      if (ledger[i].tie_break > ledger[winner].tie_break) winner = i;
    NodeLedger& w = ledger[winner];
    if (w.assigned) throw ConstructError("tie-break collision: node claimed twice");
    w.label = targets.per_orbit[w.orbit][w.counter];
    w.assigned = true;
    w.tie_break = kClaimed;
    ++w.counter;
    for (int i = 0; i < n; ++i) {
      if (i != winner && ledger[i].orbit == w.orbit) ++ledger[i].counter;
    }
    result.claim_order.push_back(winner);
  }
  for (int i = 0; i < n; ++i) {
    if (!ledger[i].assigned) throw ConstructError("node left unassigned");
    result.labels[i] = ledger[i].label;
  }
  return result;
}

AssignmentResult assign_labels_rni(const AttributedGraph& g, const OrbitTargets& targets,
                                   Rng& rng) {
  const int n = g.node_count();
  std::vector<double> tie(n);
  for (int attempt = 0; attempt < 64; ++attempt) {
    for (double& x : tie) x = rng.uniform();
    std::vector<double> sorted = tie;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end())
      return assign_labels_with_ties(g, targets, tie);
  }
  throw ConstructError("could not draw tie-free noise");
}

AssignmentResult assign_labels_uid(const AttributedGraph& g, const OrbitTargets& targets) {
  std::vector<double> tie(g.node_count());
  for (int i = 0; i < g.node_count(); ++i) tie[i] = static_cast<double>(i);
  return assign_labels_with_ties(g, targets, tie);
}

std::vector<std::vector<double>> assign_vector_labels_rni(const AttributedGraph& g,
                                                          const VectorOrbitTargets& targets,
                                                          Rng& rng) {
  const int n = g.node_count();
  const OrbitPartition part = orbit_partition(g);
  if (static_cast<int>(targets.per_orbit.size()) != part.orbit_count())
    throw ConstructError("target multiset count does not match orbit count");
  for (int k = 0; k < part.orbit_count(); ++k)
    if (targets.per_orbit[k].size() != part.orbits[k].size())
      throw ConstructError("target multiset size does not match orbit size");

  std::vector<double> tie(n);
  for (double& x : tie) x = rng.uniform();
  std::vector<int> counters;
  std::vector<int> order = run_claims(part, tie, counters);

  std::vector<std::vector<double>> labels(n);
  std::vector<int> next_index(part.orbit_count(), 0);
  for (int winner : order) {
    const int orbit = part.orbit_of[winner];
    labels[winner] = targets.per_orbit[orbit][next_index[orbit]++];
  }
  return labels;
}

bool multiset_eps_equal(std::vector<double> a, std::vector<double> b, double eps) {
  if (a.size() != b.size()) return false;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > eps) return false;
  return true;
}

}  // namespace gdnlab
