#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "gdnlab/graph.hpp"
#include "gdnlab/tensor.hpp"

namespace gdnlab {

struct EnvError : std::runtime_error {
  explicit EnvError(const std::string& what) : std::runtime_error(what) {}
};

struct EnvConfig {
  std::string env_name;
  int dim = 0;
  int nagents = 0;
  int vision = 1;
  int max_steps = 20;
  int comm_range = 0;
  std::string difficulty = "easy";
  std::string mode = "cooperative";

  double add_rate = 0.3;          // traffic junction car entry probability
  int find_range = 3;             // drone scatter
  int min_target_distance = 3;
  std::string distance_metric = "manhattan";  // pairwise-distance metric: manhattan | euclidean

  // reward constants; the tables leave these open, so they stay configurable
  double tj_linger_penalty = 0.01;
  double tj_collision_penalty = 10.0;
  double pp_living_penalty = 0.05;
  double pp_on_prey_reward = 0.25;
  double ds_split_reward = 0.1;
  double ds_find_reward = 100.0;
  double bp_move_reward = 10.0;
  double bp_clear_reward = 100.0;
  double bp_exert_penalty = 1.0;

  void validate() const;
  static EnvConfig defaults_for(const std::string& env_name);
};

enum class MetricPolarity { kHigherBetter, kLowerBetter };

struct MetricDecl {
  std::string name;
  MetricPolarity polarity;
};

using CommMask = std::vector<std::vector<std::uint8_t>>;
using Metrics = std::map<std::string, double>;

struct StepResult {
  Mat obs;                           // nagents x obs_dim, raw (pre-augmentation)
  std::vector<double> rewards;
  bool done = false;
  CommMask comm_mask;                // no self-loops
  std::vector<std::uint8_t> active;  // agent participates this step
};

class Env {
 public:
  virtual ~Env() = default;
  virtual const EnvConfig& config() const = 0;
  virtual int nagents() const { return config().nagents; }
  virtual int obs_dim() const = 0;
  virtual int n_actions() const = 0;
  virtual StepResult reset(Rng& rng) = 0;
  virtual StepResult step(const std::vector<int>& actions) = 0;
  virtual CommMask comm_graph() const = 0;
  virtual std::vector<MetricDecl> metric_decls() const = 0;
  virtual Metrics episode_metrics() const = 0;  // valid once done
};

std::unique_ptr<Env> make_env(const EnvConfig& config);

// shared helpers
int chebyshev(int r1, int c1, int r2, int c2);
int manhattan(int r1, int c1, int r2, int c2);
CommMask range_comm_mask(const std::vector<std::pair<int, int>>& positions,
                         const std::vector<std::uint8_t>& active, int range);

}  // namespace gdnlab
