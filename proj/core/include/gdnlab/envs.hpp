#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "gdnlab/env.hpp"

namespace gdnlab {

using Cell = std::pair<int, int>;

// Two intersecting one-way roads; cars enter with probability add_rate and
// either gas (advance along their route) or brake. An episode succeeds when
// no collision ever happened.
class TrafficJunctionEnv : public Env {
 public:
  explicit TrafficJunctionEnv(const EnvConfig& config);

  const EnvConfig& config() const override { return config_; }
  int obs_dim() const override;
  int n_actions() const override { return 2; }  // 0 = gas, 1 = brake
  StepResult reset(Rng& rng) override;
  StepResult step(const std::vector<int>& actions) override;
  CommMask comm_graph() const override;
  std::vector<MetricDecl> metric_decls() const override;
  Metrics episode_metrics() const override;

  bool had_collision() const { return collided_; }

 private:
  struct Car {
    bool active = false;
    int route = 0;
    int progress = 0;  // index along the route
    int time_in_system = 0;
  };

  Cell car_pos(const Car& car) const;
  void spawn_cars();
  StepResult observe(std::vector<double> rewards);

  EnvConfig config_;
  std::vector<std::vector<Cell>> routes_;
  std::vector<Car> cars_;
  Rng rng_{0};
  int timestep_ = 0;
  bool collided_ = false;
  bool done_ = false;
  double reward_sum_ = 0.0;
};

// Predators with limited vision search for a stationary prey; reward each
// step is proportional to the number of predators on the prey. Success means
// every predator reached it.
class PredatorPreyEnv : public Env {
 public:
  explicit PredatorPreyEnv(const EnvConfig& config);

  const EnvConfig& config() const override { return config_; }
  int obs_dim() const override;
  int n_actions() const override { return 5; }  // N E S W stay
  StepResult reset(Rng& rng) override;
  StepResult step(const std::vector<int>& actions) override;
  CommMask comm_graph() const override;
  std::vector<MetricDecl> metric_decls() const override;
  Metrics episode_metrics() const override;

  const std::vector<Cell>& predators() const { return predators_; }
  Cell prey() const { return prey_; }

 private:
  StepResult observe(std::vector<double> rewards);

  EnvConfig config_;
  std::vector<Cell> predators_;
  std::vector<std::uint8_t> on_prey_;
  Cell prey_{0, 0};
  int timestep_ = 0;
  bool done_ = false;
  bool success_ = false;
  double reward_sum_ = 0.0;
};

// Four drones spawn clustered at the center of a homogeneous field and are
// rewarded for spreading out; the episode ends when a drone comes within
// find_range of the hidden target.
class DroneScatterEnv : public Env {
 public:
  explicit DroneScatterEnv(const EnvConfig& config);

  const EnvConfig& config() const override { return config_; }
  int obs_dim() const override { return 9 + 4; }  // ground patch + last action
  int n_actions() const override { return 4; }    // N E S W
  StepResult reset(Rng& rng) override;
  StepResult step(const std::vector<int>& actions) override;
  CommMask comm_graph() const override;
  std::vector<MetricDecl> metric_decls() const override;
  Metrics episode_metrics() const override;

  const std::vector<Cell>& drones() const { return drones_; }
  Cell target() const { return target_; }
  double mean_pairwise_distance() const;

 private:
  StepResult observe(std::vector<double> rewards);

  EnvConfig config_;
  std::vector<Cell> drones_;
  std::vector<int> last_action_;
  Cell target_{0, 0};
  int timestep_ = 0;
  bool done_ = false;
  bool found_ = false;
  int steps_taken_ = 0;
  double pairwise_accum_ = 0.0;
  int pairwise_samples_ = 0;
  double reward_sum_ = 0.0;
};

// Ten robots on a 12x12 site; either one large box (eight robots attached)
// or two small boxes (four each) spawns in the center, and the attached
// communication rings realize the classic 1-WL-indistinguishable pair.
class BoxPushingEnv : public Env {
 public:
  explicit BoxPushingEnv(const EnvConfig& config);

  const EnvConfig& config() const override { return config_; }
  int obs_dim() const override;
  int n_actions() const override { return 9; }  // stay, move NESW, power-move NESW
  StepResult reset(Rng& rng) override;
  StepResult step(const std::vector<int>& actions) override;
  CommMask comm_graph() const override;
  std::vector<MetricDecl> metric_decls() const override;
  Metrics episode_metrics() const override;

  struct Box {
    std::vector<Cell> cells;
    std::vector<int> robots;  // indices of attached robots
    bool large = false;
    bool cleared = false;
  };

  const std::vector<Box>& boxes() const { return boxes_; }
  const std::vector<Cell>& robots() const { return robots_; }
  bool attached(int robot) const { return attached_to_[robot] >= 0; }
  int clearing_width() const { return 3; }
  bool in_clearing(const Cell& cell) const;
  int steps_to_clear(const Box& box, int dir) const;  // -1 when impossible

  // Scripted oracle: every attached robot pushes its box toward the nearest
  // clearing edge (ties N > E > S > W), power moves iff the box is large;
  // free robots stay.
  std::vector<int> expert_actions() const;

 private:
  StepResult observe(std::vector<double> rewards);
  bool cell_free(const Cell& cell, int ignore_box = -1) const;
  void clear_box(int box_index);

  EnvConfig config_;
  std::vector<Box> boxes_;
  std::vector<Cell> robots_;
  std::vector<int> attached_to_;  // box index or -1
  std::vector<int> last_action_;
  int spawned_boxes_ = 0;
  int cleared_boxes_ = 0;
  int timestep_ = 0;
  bool done_ = false;
  double reward_sum_ = 0.0;
};

std::vector<int> boxpushing_expert(const BoxPushingEnv& env);

}  // namespace gdnlab
