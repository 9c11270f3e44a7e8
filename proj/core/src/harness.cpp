#include "gdnlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "gdnlab/envs.hpp"

namespace gdnlab {

namespace {

const std::set<std::string> kModels = {"commnet", "ic3net", "tarmac", "t-ic3net", "dgn", "random"};

LayerKind kind_for_model(const std::string& model) {
  if (model == "commnet") return LayerKind::kMeanAgg;
  if (model == "ic3net") return LayerKind::kGatedMean;
  if (model == "tarmac") return LayerKind::kAttention;
  if (model == "t-ic3net") return LayerKind::kGatedAttention;
  if (model == "dgn") return LayerKind::kAttention;
  throw ConfigError("model style has no layer mapping: " + model);
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

bool parse_bool(const std::string& value) {
  if (value == "true" || value == "True" || value == "1") return true;
  if (value == "false" || value == "False" || value == "0") return false;
  throw ConfigError("expected boolean, got: " + value);
}

double parse_double(const std::string& value) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(value, &pos);
    if (pos != value.size()) throw ConfigError("trailing characters in number: " + value);
    return x;
  } catch (const std::invalid_argument&) {
    throw ConfigError("expected number, got: " + value);
  }
}

int parse_int(const std::string& value) {
  const double x = parse_double(value);
  if (x != std::floor(x)) throw ConfigError("expected integer, got: " + value);
  return static_cast<int>(x);
}

}  // namespace

void RunConfig::validate() const {
  env.validate();
  if (!kModels.count(model)) throw ConfigError("unknown model style: " + model);
  if (rni < 0.0 || rni > 1.0) throw ConfigError("rni must be in [0, 1]");
  if (num_epochs < 0) throw ConfigError("num_epochs must be >= 0");
  if (eval_episodes < 1) throw ConfigError("eval_episodes must be >= 1");
  if (comm_passes < 1) throw ConfigError("comm_passes must be >= 1");
  if (hid_size < 1) throw ConfigError("hid_size must be >= 1");
  if (imitation && env.env_name != "box_pushing")
    throw ConfigError("imitation requires the box_pushing environment");
  train.validate();
}

std::string RunConfig::augmentation_name() const {
  if (rni == 0.0) return "none";
  if (rni == 1.0) return "unique-id";
  std::ostringstream out;
  out << "rni-" << rni;
  return out.str();
}

std::string RunConfig::run_tag() const {
  std::ostringstream out;
  out << env.env_name << '_' << model << '_' << augmentation_name() << "_seed" << seed;
  return out.str();
}

AugmentationConfig augmentation_for(const RunConfig& cfg) {
  AugmentationConfig aug;
  aug.max_agents = cfg.env.nagents;
  if (cfg.rni == 0.0) {
    aug.mode = AugmentationMode::kNone;
  } else if (cfg.rni == 1.0) {
    aug.mode = AugmentationMode::kUniqueId;
  } else {
    aug.mode = AugmentationMode::kRni;
    aug.rni_ratio = cfg.rni;
  }
  return aug;
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "env_name") cfg.env = EnvConfig::defaults_for(value);
  else if (key == "dim") cfg.env.dim = parse_int(value);
  else if (key == "nagents") cfg.env.nagents = parse_int(value);
  else if (key == "vision") cfg.env.vision = parse_int(value);
  else if (key == "max_steps") cfg.env.max_steps = parse_int(value);
  else if (key == "comm_range") cfg.env.comm_range = parse_int(value);
  else if (key == "add_rate" || key == "add_rate_max" || key == "add_rate_min")
    cfg.env.add_rate = parse_double(value);
  else if (key == "difficulty") cfg.env.difficulty = value;
  else if (key == "mode") cfg.env.mode = value;
  else if (key == "find_range") cfg.env.find_range = parse_int(value);
  else if (key == "min_target_distance") cfg.env.min_target_distance = parse_int(value);
  else if (key == "distance_metric") cfg.env.distance_metric = value;
  else if (key == "tj_linger_penalty") cfg.env.tj_linger_penalty = parse_double(value);
  else if (key == "tj_collision_penalty") cfg.env.tj_collision_penalty = parse_double(value);
  else if (key == "pp_living_penalty") cfg.env.pp_living_penalty = parse_double(value);
  else if (key == "pp_on_prey_reward") cfg.env.pp_on_prey_reward = parse_double(value);
  else if (key == "ds_split_reward") cfg.env.ds_split_reward = parse_double(value);
  else if (key == "ds_find_reward") cfg.env.ds_find_reward = parse_double(value);
  else if (key == "bp_move_reward") cfg.env.bp_move_reward = parse_double(value);
  else if (key == "bp_clear_reward") cfg.env.bp_clear_reward = parse_double(value);
  else if (key == "bp_exert_penalty") cfg.env.bp_exert_penalty = parse_double(value);
  else if (key == "model") cfg.model = value;
  else if (key == "rni") cfg.rni = parse_double(value);
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_double(value));
  else if (key == "num_epochs") cfg.num_epochs = parse_int(value);
  else if (key == "eval_episodes") cfg.eval_episodes = parse_int(value);
  else if (key == "greedy_a2c_eval") cfg.greedy_a2c_eval = parse_bool(value);
  else if (key == "imitation") cfg.imitation = parse_bool(value);
  else if (key == "comm_passes") cfg.comm_passes = parse_int(value);
  else if (key == "recurrent") cfg.recurrent = parse_bool(value);
  else if (key == "global_readout") cfg.global_readout = parse_bool(value);
  else if (key == "hid_size") cfg.hid_size = parse_int(value);
  else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "trace_file") cfg.trace_file = value;
  else if (key == "stop_metric") cfg.stop_metric = value;
  else if (key == "stop_threshold") cfg.stop_threshold = parse_double(value);
  else if (key == "lrate") cfg.train.lrate = parse_double(value);
  else if (key == "gamma") cfg.train.gamma = parse_double(value);
  else if (key == "value_coeff") cfg.train.value_coeff = parse_double(value);
  else if (key == "entr") cfg.train.entropy_coeff = parse_double(value);
  else if (key == "batch_size") cfg.train.batch_size = parse_int(value);
  else if (key == "epoch_size") cfg.train.epoch_size = parse_int(value);
  else if (key == "dgn_batch_size") cfg.train.dgn_batch_size = parse_int(value);
  else if (key == "update_interval") cfg.train.update_interval = parse_int(value);
  else if (key == "train_steps") cfg.train.train_steps = parse_int(value);
  else if (key == "epsilon_start") cfg.train.epsilon_start = parse_double(value);
  else if (key == "epsilon_min") cfg.train.epsilon_min = parse_double(value);
  else if (key == "epsilon_step") cfg.train.epsilon_step = parse_double(value);
  else if (key == "buffer_capacity") cfg.train.buffer_capacity = parse_int(value);
  else if (key == "grad_clip") cfg.train.grad_clip = parse_double(value);
  else if (key == "num_imitation_experiences")
    cfg.train.num_imitation_experiences = parse_int(value);
  else if (key == "num_normal_experiences") cfg.train.num_normal_experiences = parse_int(value);
  else if (key == "curr_start" || key == "curr_end" || key == "nprocesses" ||
           key == "normalize_rewards" || key == "num_evals") {
    // accepted for config-file compatibility; fixed in this implementation
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

RunConfig parse_run_config(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value', got: " + line);
    pairs.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  RunConfig cfg;
  bool has_env = false;
  for (const auto& [key, value] : pairs) {
    if (key == "env_name") {
      apply_override(cfg, key, value);
      has_env = true;
    }
  }
  if (!has_env) throw ConfigError("config must set env_name");
  for (const auto& [key, value] : pairs) {
    if (key != "env_name") apply_override(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

RunConfig parse_run_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_run_config(in);
}

namespace {

int sample_from_logits(const Mat& logits, int row, Rng& rng) {
  double mx = logits(row, 0);
  for (int a = 1; a < logits.cols; ++a) mx = std::max(mx, logits(row, a));
  double z = 0.0;
  for (int a = 0; a < logits.cols; ++a) z += std::exp(logits(row, a) - mx);
  double u = rng.uniform() * z;
  for (int a = 0; a < logits.cols; ++a) {
    u -= std::exp(logits(row, a) - mx);
    if (u <= 0.0) return a;
  }
  return logits.cols - 1;
}

int argmax_row(const Mat& m, int row) {
  int best = 0;
  for (int a = 1; a < m.cols; ++a)
    if (m(row, a) > m(row, best)) best = a;
  return best;
}

enum class ActionMode { kStochastic, kGreedy, kEpsilonGreedy, kRandom, kExpert };

struct PlayedEpisode {
  EpisodeData data;
  Metrics metrics;
};

struct Runner {
  const RunConfig& cfg;
  Env& env;
  GdnModel* model;
  AugmentationConfig aug;
  Rng& env_rng;
  Rng& action_rng;
  Rng& aug_rng;
  std::ostream* trace = nullptr;
  long long trace_episode = 0;

  PlayedEpisode play(ActionMode mode, double epsilon) {
    PlayedEpisode ep;
    StepResult sr = env.reset(env_rng);
    Mat hidden;
    bool have_hidden = false;
    if (model && model->config.recurrent) {
      hidden = zero_hidden(*model, env.nagents());
      have_hidden = true;
    }
    while (!sr.done) {
      const Mat obs = augment(sr.obs, aug, aug_rng);
      const AttributedGraph comm = graph_from_mask(sr.comm_mask);
      std::vector<int> actions(env.nagents(), 0);
      if (mode == ActionMode::kExpert) {
        actions = boxpushing_expert(dynamic_cast<const BoxPushingEnv&>(env));
      } else if (mode == ActionMode::kRandom) {
        for (int i = 0; i < env.nagents(); ++i)
          actions[i] = sr.active[i] ? action_rng.uniform_int(env.n_actions()) : 0;
      } else {
        const ForwardResult out = forward(*model, comm, obs, have_hidden ? &hidden : nullptr);
        if (have_hidden) hidden = out.hidden;
        for (int i = 0; i < env.nagents(); ++i) {
          if (!sr.active[i]) continue;
          switch (mode) {
            case ActionMode::kStochastic:
              actions[i] = sample_from_logits(out.outputs, i, action_rng);
              break;
            case ActionMode::kGreedy:
              actions[i] = argmax_row(out.outputs, i);
              break;
            case ActionMode::kEpsilonGreedy:
              actions[i] = action_rng.bernoulli(epsilon)
                               ? action_rng.uniform_int(env.n_actions())
                               : argmax_row(out.outputs, i);
              break;
            default:
              break;
          }
        }
      }

      ep.data.obs.push_back(obs);
      ep.data.comms.push_back(comm);
      ep.data.actions.push_back(actions);
      ep.data.active.push_back(sr.active);

      sr = env.step(actions);
      ep.data.rewards.push_back(sr.rewards);
      if (trace) {
        *trace << "episode=" << trace_episode << " t=" << ep.data.steps() - 1 << " actions=";
        for (std::size_t i = 0; i < actions.size(); ++i)
          *trace << (i ? "," : "") << actions[i];
        *trace << " rewards=";
        for (std::size_t i = 0; i < sr.rewards.size(); ++i)
          *trace << (i ? "," : "") << sr.rewards[i];
        *trace << '\n';
      }
    }
    // terminal observation, needed by the replay path
    ep.data.obs.push_back(augment(sr.obs, aug, aug_rng));
    ep.data.comms.push_back(graph_from_mask(sr.comm_mask));
    ep.data.active.push_back(sr.active);
    ep.metrics = env.episode_metrics();
    ++trace_episode;
    return ep;
  }

  std::vector<Experience> to_experiences(const EpisodeData& data, const CommMask& = {}) const {
    std::vector<Experience> out;
    const int T = static_cast<int>(data.rewards.size());
    for (int t = 0; t < T; ++t) {
      Experience e;
      e.obs = data.obs[t];
      e.actions = data.actions[t];
      e.next_obs = data.obs[t + 1];
      e.rewards = data.rewards[t];
      e.comm = mask_of(data.comms[t]);
      e.next_comm = mask_of(data.comms[t + 1]);
      e.active = data.active[t];
      e.next_active = data.active[t + 1];
      e.terminal = t == T - 1;
      out.push_back(std::move(e));
    }
    return out;
  }

  static CommMask mask_of(const AttributedGraph& g) {
    CommMask mask(g.node_count(), std::vector<std::uint8_t>(g.node_count(), 0));
    for (const auto& [i, j] : g.edges()) mask[i][j] = 1;
    return mask;
  }
};

EpisodeData strip_terminal(EpisodeData data) {
  data.obs.pop_back();
  data.comms.pop_back();
  data.active.pop_back();
  return data;
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& cfg, std::ostream* train_log) {
  cfg.validate();
  auto env = make_env(cfg.env);
  Rng master(cfg.seed);
  Rng env_rng = master.fork();
  Rng init_rng = master.fork();
  Rng action_rng = master.fork();
  Rng aug_rng = master.fork();
  Rng buffer_rng = master.fork();

  const AugmentationConfig aug = augmentation_for(cfg);
  const bool is_random = cfg.model == "random";
  const bool is_dqn = cfg.model == "dgn";

  std::optional<GdnModel> model;
  std::optional<GdnModel> target;
  if (!is_random) {
    ModelConfig mc;
    mc.kind = kind_for_model(cfg.model);
    mc.rounds = cfg.comm_passes;
    mc.hidden = cfg.hid_size;
    mc.obs_dim = augmented_dim(env->obs_dim(), aug);
    mc.n_actions = env->n_actions();
    mc.recurrent = cfg.recurrent;
    mc.global_readout = cfg.global_readout;
    mc.value_head = !is_dqn;
    model = make_gdn_model(mc, init_rng);
    if (is_dqn) target = *model;
  }

  std::ofstream trace_stream;
  if (!cfg.trace_file.empty()) trace_stream.open(cfg.trace_file);
  Runner runner{cfg, *env, model ? &*model : nullptr, aug, env_rng, action_rng, aug_rng,
                trace_stream.is_open() ? &trace_stream : nullptr};

  ReplayBuffer buffer(cfg.train.buffer_capacity);
  long long episode_count = 0;
  long long normal_steps_since_expert = 0;

  ExperimentResult result;
  result.decls = env->metric_decls();

  auto push_expert_experiences = [&]() {
    int added = 0;
    while (added < cfg.train.num_imitation_experiences) {
      PlayedEpisode ep = runner.play(ActionMode::kExpert, 0.0);
      for (Experience& e : runner.to_experiences(ep.data)) {
        buffer.add(std::move(e));
        if (++added >= cfg.train.num_imitation_experiences) break;
      }
    }
  };

  auto expert_episode_batch = [&](std::vector<EpisodeData>& bucket) {
    int added = 0;
    while (added < cfg.train.num_imitation_experiences) {
      PlayedEpisode ep = runner.play(ActionMode::kExpert, 0.0);
      added += static_cast<int>(ep.data.rewards.size());
      bucket.push_back(strip_terminal(std::move(ep.data)));
    }
  };

  auto train_epoch_a2c = [&](int epoch) {
    double policy_loss = 0.0, value_loss = 0.0;
    for (int b = 0; b < cfg.train.epoch_size; ++b) {
      std::vector<EpisodeData> episodes;
      int steps = 0;
      while (steps < cfg.train.batch_size) {
        PlayedEpisode ep = runner.play(ActionMode::kStochastic, 0.0);
        ++episode_count;
        const int ep_steps = static_cast<int>(ep.data.rewards.size());
        steps += ep_steps;
        normal_steps_since_expert += ep_steps;
        episodes.push_back(strip_terminal(std::move(ep.data)));
        if (cfg.imitation && normal_steps_since_expert >= cfg.train.num_normal_experiences) {
          expert_episode_batch(episodes);
          normal_steps_since_expert = 0;
        }
      }
      const A2cStats stats = a2c_update(*model, episodes, cfg.train);
      policy_loss += stats.policy_loss;
      value_loss += stats.value_loss;
    }
    if (train_log)
      *train_log << "epoch=" << epoch << " policy_loss=" << policy_loss
                 << " value_loss=" << value_loss << " epsilon=0 buffer=0\n";
  };

  auto train_epoch_dqn = [&](int epoch) {
    double loss = 0.0;
    int steps = 0;
    const int budget = cfg.train.epoch_size * cfg.train.batch_size;
    while (steps < budget) {
      const double eps = epsilon_for(episode_count, cfg.train);
      PlayedEpisode ep = runner.play(ActionMode::kEpsilonGreedy, eps);
      ++episode_count;
      for (Experience& e : runner.to_experiences(ep.data)) {
        buffer.add(std::move(e));
        ++steps;
        ++normal_steps_since_expert;
        if (cfg.imitation && normal_steps_since_expert >= cfg.train.num_normal_experiences) {
          push_expert_experiences();
          normal_steps_since_expert = 0;
        }
      }
      if (episode_count % cfg.train.update_interval == 0) {
        for (int s = 0; s < cfg.train.train_steps; ++s) {
          const auto stats = dqn_update(*model, *target, buffer, cfg.train, buffer_rng);
          if (stats) loss += stats->loss;
        }
        target->params = model->params;  // hard copy
      }
    }
    if (train_log)
      *train_log << "epoch=" << epoch << " dqn_loss=" << loss
                 << " epsilon=" << epsilon_for(episode_count, cfg.train)
                 << " buffer=" << buffer.size() << '\n';
  };

  auto evaluate = [&](int epoch) {
    std::map<std::string, double> sums;
    for (int e = 0; e < cfg.eval_episodes; ++e) {
      ActionMode mode = ActionMode::kRandom;
      if (!is_random) {
        if (is_dqn || cfg.greedy_a2c_eval) mode = ActionMode::kGreedy;
        else mode = ActionMode::kStochastic;
      }
      PlayedEpisode ep = runner.play(mode, 0.0);
      for (const auto& [name, value] : ep.metrics) sums[name] += value;
    }
    bool stop = false;
    for (const auto& [name, sum] : sums) {
      const double mean = sum / cfg.eval_episodes;
      result.records.push_back({epoch, name, mean});
      if (name == cfg.stop_metric) {
        MetricPolarity pol = MetricPolarity::kHigherBetter;
        for (const MetricDecl& d : result.decls)
          if (d.name == name) pol = d.polarity;
        stop = pol == MetricPolarity::kHigherBetter ? mean >= cfg.stop_threshold
                                                    : mean <= cfg.stop_threshold;
      }
    }
    return stop;
  };

  for (int epoch = 0; epoch <= cfg.num_epochs; ++epoch) {
    if (epoch > 0) {
      if (is_random) {
        // nothing to train
      } else if (is_dqn) {
        train_epoch_dqn(epoch);
      } else {
        train_epoch_a2c(epoch);
      }
    }
    const bool stop = evaluate(epoch);
    if (!cfg.out_dir.empty() && model) {
      std::filesystem::create_directories(cfg.out_dir);
      save_model_file(cfg.out_dir + "/" + cfg.run_tag() + ".ckpt", *model);
    }
    if (stop) break;
  }

  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream out(cfg.out_dir + "/" + cfg.run_tag() + ".records");
    write_run_records(out, cfg, result);
  }
  return result;
}

std::map<std::string, double> best_during_training(const std::vector<MetricRecord>& records,
                                                   const std::vector<MetricDecl>& decls) {
  if (records.empty()) throw std::invalid_argument("no metric records");
  std::map<std::string, MetricPolarity> polarity;
  for (const MetricDecl& d : decls) polarity[d.name] = d.polarity;
  std::map<std::string, double> best;
  for (const MetricRecord& r : records) {
    auto pol = polarity.find(r.metric);
    if (pol == polarity.end()) throw std::invalid_argument("undeclared metric: " + r.metric);
    auto it = best.find(r.metric);
    if (it == best.end()) {
      best[r.metric] = r.value;
    } else if (pol->second == MetricPolarity::kHigherBetter) {
      it->second = std::max(it->second, r.value);
    } else {
      it->second = std::min(it->second, r.value);
    }
  }
  return best;
}

Aggregate aggregate_values(const std::vector<double>& per_seed_bests) {
  if (per_seed_bests.empty()) throw std::invalid_argument("no per-seed values");
  Aggregate agg;
  agg.seeds = static_cast<int>(per_seed_bests.size());
  double sum = 0.0;
  for (double v : per_seed_bests) sum += v;
  agg.mean = sum / agg.seeds;
  if (agg.seeds >= 2) {
    double sq = 0.0;
    for (double v : per_seed_bests) sq += (v - agg.mean) * (v - agg.mean);
    const double stddev = std::sqrt(sq / (agg.seeds - 1));
    agg.ci = 1.96 * stddev / std::sqrt(static_cast<double>(agg.seeds));
  }
  return agg;
}

void write_run_records(std::ostream& out, const RunConfig& cfg, const ExperimentResult& result) {
  out << "# gdnlab-run 1\n";
  out << "# env_name = " << cfg.env.env_name << '\n';
  out << "# model = " << cfg.model << '\n';
  out << "# augmentation = " << cfg.augmentation_name() << '\n';
  out << "# seed = " << cfg.seed << '\n';
  for (const MetricDecl& d : result.decls)
    out << "# polarity " << d.name << " = "
        << (d.polarity == MetricPolarity::kHigherBetter ? "max" : "min") << '\n';
  out << "epoch,metric,value\n";
  out << std::setprecision(17);
  for (const MetricRecord& r : result.records)
    out << r.epoch << ',' << r.metric << ',' << r.value << '\n';
}

std::string aggregate_directory(const std::string& dir) {
  struct RunFile {
    std::string env, model, augmentation;
    std::uint64_t seed = 0;
    std::vector<MetricRecord> records;
    std::vector<MetricDecl> decls;
  };
  std::vector<RunFile> runs;

  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".records") continue;
    std::ifstream in(entry.path());
    if (!in) continue;
    RunFile run;
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("# ", 0) == 0) {
        std::istringstream hs(line.substr(2));
        std::string key;
        hs >> key;
        if (key == "env_name" || key == "model" || key == "augmentation" || key == "seed") {
          std::string eq, value;
          hs >> eq >> value;
          if (key == "env_name") run.env = value;
          if (key == "model") run.model = value;
          if (key == "augmentation") run.augmentation = value;
          if (key == "seed") run.seed = std::stoull(value);
        } else if (key == "polarity") {
          std::string name, eq, pol;
          hs >> name >> eq >> pol;
          run.decls.push_back({name, pol == "min" ? MetricPolarity::kLowerBetter
                                                  : MetricPolarity::kHigherBetter});
        }
        continue;
      }
      if (line.empty() || line == "epoch,metric,value") continue;
      std::istringstream rs(line);
      MetricRecord rec;
      std::string tok;
      std::getline(rs, tok, ',');
      rec.epoch = std::stoi(tok);
      std::getline(rs, rec.metric, ',');
      std::getline(rs, tok, ',');
      rec.value = std::stod(tok);
      run.records.push_back(rec);
    }
    if (!run.records.empty()) runs.push_back(std::move(run));
  }

  // (env, model, augmentation, metric) -> per-seed bests
  std::map<std::tuple<std::string, std::string, std::string, std::string>, std::vector<double>>
      groups;
  for (const RunFile& run : runs) {
    const auto bests = best_during_training(run.records, run.decls);
    for (const auto& [metric, value] : bests)
      groups[{run.env, run.model, run.augmentation, metric}].push_back(value);
  }

  std::ostringstream out;
  out << "env,model,augmentation,metric,mean,ci,seeds\n";
  for (const auto& [key, values] : groups) {
    const auto& [env, model, augmentation, metric] = key;
    const Aggregate agg = aggregate_values(values);
    out << env << ',' << model << ',' << augmentation << ',' << metric << ',' << agg.mean << ',';
    if (agg.ci) out << *agg.ci;
    out << ',' << agg.seeds << '\n';
  }
  return out.str();
}

}  // namespace gdnlab
