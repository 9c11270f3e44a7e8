#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gdnlab/construct.hpp"
#include "gdnlab/harness.hpp"
#include "gdnlab/orbits.hpp"
#include "gdnlab/wl.hpp"

namespace {

using namespace gdnlab;

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides,
            bool quiet) {
  RunConfig cfg = parse_run_config_file(config_path);
  for (const std::string& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) throw ConfigError("override must be key=value: " + ov);
    apply_override(cfg, ov.substr(0, eq), ov.substr(eq + 1));
  }
  cfg.validate();

  const ExperimentResult result = run_experiment(cfg, quiet ? nullptr : &std::cerr);
  if (cfg.out_dir.empty()) {
    write_run_records(std::cout, cfg, result);
  } else {
    std::cout << "run records written to " << cfg.out_dir << "/" << cfg.run_tag()
              << ".records\n";
  }
  const auto best = best_during_training(result.records, result.decls);
  for (const auto& [metric, value] : best)
    std::cout << "best " << metric << " = " << value << '\n';
  return 0;
}

int cmd_aggregate(const std::string& dir) {
  std::cout << aggregate_directory(dir);
  return 0;
}

int cmd_wl_check(const std::string& a, const std::string& b) {
  const AttributedGraph g1 = read_graph_file(a);
  const AttributedGraph g2 = read_graph_file(b);
  const bool same = wl_indistinguishable(g1, g2);
  std::cout << (same ? "indistinguishable" : "distinguishable") << '\n';
  if (g1.node_count() <= kOrbitNodeBudget && g2.node_count() <= kOrbitNodeBudget) {
    std::cout << "isomorphic: " << (is_isomorphic(g1, g2) ? "yes" : "no") << '\n';
  }
  return 0;
}

int cmd_orbits(const std::string& path) {
  const AttributedGraph g = read_graph_file(path);
  const OrbitPartition part = orbit_partition(g);
  std::cout << part.orbit_count() << " orbits, " << automorphisms(g).size()
            << " automorphisms\n";
  for (int k = 0; k < part.orbit_count(); ++k) {
    std::cout << "orbit " << k << ":";
    for (int node : part.orbits[k]) std::cout << ' ' << node;
    std::cout << '\n';
  }
  return 0;
}

int cmd_construct(const std::string& mode, const std::string& graph_path,
                  const std::string& targets_path, std::uint64_t seed) {
  const AttributedGraph g = read_graph_file(graph_path);
  const OrbitPartition part = orbit_partition(g);

  // targets file: line k holds the labels of orbit k, whitespace separated
  std::ifstream in(targets_path);
  if (!in) throw ConstructError("cannot open targets file: " + targets_path);
  OrbitTargets targets;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<double> labels;
    double x;
    while (ls >> x) labels.push_back(x);
    if (!labels.empty()) targets.per_orbit.push_back(std::move(labels));
  }
  if (static_cast<int>(targets.per_orbit.size()) != part.orbit_count())
    throw ConstructError("targets file must hold one line per orbit (" +
                         std::to_string(part.orbit_count()) + " orbits)");

  AssignmentResult result;
  if (mode == "rni") {
    Rng rng(seed);
    result = assign_labels_rni(g, targets, rng);
  } else if (mode == "uid") {
    result = assign_labels_uid(g, targets);
  } else {
    throw ConstructError("mode must be rni or uid");
  }
  for (int i = 0; i < g.node_count(); ++i)
    std::cout << "node " << i << " orbit " << part.orbit_of[i] << " label " << result.labels[i]
              << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph decision network laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "train and evaluate one configuration");
  run->add_option("--config", config_path, "key = value run configuration")->required();
  run->add_option("--override", overrides, "key=value overrides, repeatable");
  run->add_flag("--quiet", quiet, "suppress the training log on stderr");

  std::string agg_dir;
  auto* agg = app.add_subcommand("aggregate", "aggregate .records files into a CSV table");
  agg->add_option("dir", agg_dir, "directory of run records")->required();

  std::string graph_a, graph_b;
  auto* wl = app.add_subcommand("wl-check", "1-WL indistinguishability of two graph files");
  wl->add_option("first", graph_a)->required();
  wl->add_option("second", graph_b)->required();

  std::string orbit_graph;
  auto* orb = app.add_subcommand("orbits", "automorphism orbits of a graph file");
  orb->add_option("graph", orbit_graph)->required();

  std::string mode, cons_graph, cons_targets;
  std::uint64_t seed = 1;
  auto* cons = app.add_subcommand("construct", "orbit symmetry-breaking label assignment");
  cons->add_option("--mode", mode, "rni | uid")->required();
  cons->add_option("--graph", cons_graph)->required();
  cons->add_option("--targets", cons_targets, "one line of labels per orbit")->required();
  cons->add_option("--seed", seed, "noise seed for rni mode");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, overrides, quiet);
    if (agg->parsed()) return cmd_aggregate(agg_dir);
    if (wl->parsed()) return cmd_wl_check(graph_a, graph_b);
    if (orb->parsed()) return cmd_orbits(orbit_graph);
    if (cons->parsed()) return cmd_construct(mode, cons_graph, cons_targets, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
