#include "gdnlab/harness.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace gdnlab;

TEST(RunConfig, ParsesKeyValueFile) {
  std::stringstream in(R"(# easy junction run
env_name = traffic_junction
dim = 6
nagents = 5
model = commnet
rni = 0.25
seed = 3
num_epochs = 2
greedy_a2c_eval = true
lrate = 0.002
)");
  const RunConfig cfg = parse_run_config(in);
  EXPECT_EQ(cfg.env.env_name, "traffic_junction");
  EXPECT_EQ(cfg.env.dim, 6);
  EXPECT_EQ(cfg.model, "commnet");
  EXPECT_DOUBLE_EQ(cfg.rni, 0.25);
  EXPECT_EQ(cfg.seed, 3u);
  EXPECT_EQ(cfg.num_epochs, 2);
  EXPECT_TRUE(cfg.greedy_a2c_eval);
  EXPECT_DOUBLE_EQ(cfg.train.lrate, 0.002);
  EXPECT_EQ(cfg.augmentation_name(), "rni-0.25");
}

TEST(RunConfig, EnvNameAppliedFirstKeepsOverrides) {
  std::stringstream in("dim = 9\nenv_name = traffic_junction\n");
  const RunConfig cfg = parse_run_config(in);
  EXPECT_EQ(cfg.env.dim, 9);
}

TEST(RunConfig, Validation) {
  std::stringstream missing("model = commnet\n");
  EXPECT_THROW(parse_run_config(missing), ConfigError);
  std::stringstream unknown("env_name = traffic_junction\nwarp_speed = 9\n");
  EXPECT_THROW(parse_run_config(unknown), ConfigError);
  std::stringstream bad_rni("env_name = traffic_junction\nrni = 2\n");
  EXPECT_THROW(parse_run_config(bad_rni), ConfigError);
  std::stringstream bad_model("env_name = traffic_junction\nmodel = gpt\n");
  EXPECT_THROW(parse_run_config(bad_model), ConfigError);
  std::stringstream bad_imitation("env_name = traffic_junction\nimitation = true\n");
  EXPECT_THROW(parse_run_config(bad_imitation), ConfigError);
}

TEST(RunConfig, AugmentationMapping) {
  RunConfig cfg;
  cfg.env = EnvConfig::defaults_for("drone_scatter");
  cfg.rni = 0.0;
  EXPECT_EQ(augmentation_for(cfg).mode, AugmentationMode::kNone);
  cfg.rni = 1.0;
  EXPECT_EQ(augmentation_for(cfg).mode, AugmentationMode::kUniqueId);
  EXPECT_EQ(augmentation_for(cfg).max_agents, 4);
  cfg.rni = 0.75;
  EXPECT_EQ(augmentation_for(cfg).mode, AugmentationMode::kRni);
  EXPECT_DOUBLE_EQ(augmentation_for(cfg).rni_ratio, 0.75);
}

TEST(Harness, BestDuringTrainingRespectsPolarity) {
  const std::vector<MetricDecl> decls = {{"success", MetricPolarity::kHigherBetter},
                                         {"steps_taken", MetricPolarity::kLowerBetter}};
  std::vector<MetricRecord> records = {
      {0, "success", 0.2}, {1, "success", 0.5}, {2, "success", 0.4},
      {0, "steps_taken", 15}, {1, "steps_taken", 12}, {2, "steps_taken", 13},
  };
  const auto best = best_during_training(records, decls);
  EXPECT_DOUBLE_EQ(best.at("success"), 0.5);
  EXPECT_DOUBLE_EQ(best.at("steps_taken"), 12.0);

  const auto constant = best_during_training({{0, "success", 0.7}, {1, "success", 0.7}}, decls);
  EXPECT_DOUBLE_EQ(constant.at("success"), 0.7);

  EXPECT_THROW(best_during_training({}, decls), std::invalid_argument);
  EXPECT_THROW(best_during_training({{0, "latency", 1.0}}, decls), std::invalid_argument);
}

TEST(Harness, AggregateValues) {
  const Aggregate ones = aggregate_values({1, 1, 1, 1, 1});
  EXPECT_DOUBLE_EQ(ones.mean, 1.0);
  ASSERT_TRUE(ones.ci.has_value());
  EXPECT_DOUBLE_EQ(*ones.ci, 0.0);

  // hand arithmetic: stddev of {0,1} is 0.7071..., SEM 0.5, ci 0.980
  const Aggregate pair = aggregate_values({0, 1});
  EXPECT_DOUBLE_EQ(pair.mean, 0.5);
  ASSERT_TRUE(pair.ci.has_value());
  EXPECT_NEAR(*pair.ci, 0.98, 1e-12);

  const Aggregate single = aggregate_values({0.4});
  EXPECT_FALSE(single.ci.has_value());
  EXPECT_THROW(aggregate_values({}), std::invalid_argument);
}

TEST(Harness, AggregationIsSeedOrderInvariant) {
  const Aggregate a = aggregate_values({0.1, 0.7, 0.4});
  const Aggregate b = aggregate_values({0.7, 0.4, 0.1});
  EXPECT_DOUBLE_EQ(a.mean, b.mean);
  EXPECT_DOUBLE_EQ(*a.ci, *b.ci);
}

TEST(Harness, RandomPolicyExperimentIsDeterministic) {
  RunConfig cfg;
  cfg.env = EnvConfig::defaults_for("drone_scatter");
  cfg.model = "random";
  cfg.seed = 17;
  cfg.num_epochs = 0;
  cfg.eval_episodes = 5;
  const ExperimentResult a = run_experiment(cfg);
  const ExperimentResult b = run_experiment(cfg);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].epoch, b.records[i].epoch);
    EXPECT_EQ(a.records[i].metric, b.records[i].metric);
    EXPECT_DOUBLE_EQ(a.records[i].value, b.records[i].value);
  }
  // epoch 0 only
  for (const MetricRecord& r : a.records) EXPECT_EQ(r.epoch, 0);
  // every record is a declared metric
  std::set<std::string> declared;
  for (const MetricDecl& d : a.decls) declared.insert(d.name);
  for (const MetricRecord& r : a.records) EXPECT_TRUE(declared.count(r.metric)) << r.metric;
}

TEST(Harness, TinyTrainingRunProducesAllEpochs) {
  RunConfig cfg;
  cfg.env = EnvConfig::defaults_for("drone_scatter");
  cfg.env.max_steps = 6;
  cfg.model = "commnet";
  cfg.hid_size = 8;
  cfg.comm_passes = 2;
  cfg.seed = 5;
  cfg.num_epochs = 1;
  cfg.eval_episodes = 2;
  cfg.train.batch_size = 12;
  cfg.train.epoch_size = 1;
  std::ostringstream log;
  const ExperimentResult result = run_experiment(cfg, &log);
  std::set<int> epochs;
  for (const MetricRecord& r : result.records) epochs.insert(r.epoch);
  EXPECT_EQ(epochs, (std::set<int>{0, 1}));
  EXPECT_NE(log.str().find("epoch=1"), std::string::npos);
}

TEST(Harness, DqnTrainingRunsAndRefreshesTarget) {
  RunConfig cfg;
  cfg.env = EnvConfig::defaults_for("drone_scatter");
  cfg.env.max_steps = 6;
  cfg.model = "dgn";
  cfg.hid_size = 8;
  cfg.comm_passes = 2;
  cfg.seed = 5;
  cfg.num_epochs = 1;
  cfg.eval_episodes = 2;
  cfg.train.batch_size = 30;
  cfg.train.epoch_size = 1;
  cfg.train.dgn_batch_size = 8;
  std::ostringstream log;
  const ExperimentResult result = run_experiment(cfg, &log);
  EXPECT_FALSE(result.records.empty());
  EXPECT_NE(log.str().find("dqn_loss="), std::string::npos);
}

TEST(Harness, RunRecordsRoundTripThroughAggregate) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "gdnlab_agg_test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  for (int seed = 1; seed <= 2; ++seed) {
    RunConfig cfg;
    cfg.env = EnvConfig::defaults_for("drone_scatter");
    cfg.model = "random";
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.num_epochs = 0;
    cfg.eval_episodes = 3;
    cfg.out_dir = dir.string();
    run_experiment(cfg);
  }

  const std::string csv = aggregate_directory(dir.string());
  EXPECT_NE(csv.find("env,model,augmentation,metric,mean,ci,seeds"), std::string::npos);
  EXPECT_NE(csv.find("drone_scatter,random,none,steps_taken,"), std::string::npos);
  // two seeds per row
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);  // header
  int rows = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    EXPECT_EQ(line.substr(line.size() - 1), "2");
    ++rows;
  }
  EXPECT_GE(rows, 3);
  fs::remove_all(dir);
}
