#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gdnlab/env.hpp"
#include "gdnlab/learn.hpp"
#include "gdnlab/model.hpp"

namespace gdnlab {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Baseline styles mapped onto layer stacks:
//   commnet -> mean-agg          ic3net -> gated-mean
//   tarmac  -> attention         t-ic3net -> gated-attention
//   dgn     -> attention with a Q-head trained off a replay buffer
//   random  -> no model, uniform actions (calibration baseline)
struct RunConfig {
  EnvConfig env;
  std::string model = "commnet";
  double rni = 0.0;  // 0 for none, 1 for unique IDs, otherwise the RNI ratio
  std::uint64_t seed = 1;
  int num_epochs = 0;
  int eval_episodes = 100;
  bool greedy_a2c_eval = false;
  bool imitation = false;
  int comm_passes = 4;
  bool recurrent = false;
  bool global_readout = false;
  int hid_size = 128;
  TrainConfig train;
  std::string out_dir;      // run records + checkpoints, empty = in-memory only
  std::string trace_file;   // optional line-delimited episode trace
  std::string stop_metric;  // end training once this eval metric crosses stop_threshold
  double stop_threshold = 0.0;

  void validate() const;
  std::string augmentation_name() const;
  std::string run_tag() const;
};

RunConfig parse_run_config(std::istream& in);
RunConfig parse_run_config_file(const std::string& path);
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

struct MetricRecord {
  int epoch;
  std::string metric;
  double value;
};

AugmentationConfig augmentation_for(const RunConfig& cfg);

struct ExperimentResult {
  std::vector<MetricRecord> records;
  std::vector<MetricDecl> decls;
};

// Train num_epochs epochs (policy-gradient or replay path per model style)
// with a frozen-parameter evaluation after each; epoch 0 evaluates the
// initial model.
ExperimentResult run_experiment(const RunConfig& cfg, std::ostream* train_log = nullptr);

std::map<std::string, double> best_during_training(const std::vector<MetricRecord>& records,
                                                   const std::vector<MetricDecl>& decls);

struct Aggregate {
  double mean = 0.0;
  std::optional<double> ci;  // 1.96 * SEM, needs >= 2 seeds
  int seeds = 0;
};

Aggregate aggregate_values(const std::vector<double>& per_seed_bests);

void write_run_records(std::ostream& out, const RunConfig& cfg, const ExperimentResult& result);
// Reads every .records file under dir, groups runs by (env, model,
// augmentation), and emits one CSV row per metric:
//   env,model,augmentation,metric,mean,ci,seeds
std::string aggregate_directory(const std::string& dir);

}  // namespace gdnlab
