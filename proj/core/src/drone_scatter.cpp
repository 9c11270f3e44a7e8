#include <algorithm>
#include <cmath>

#include "gdnlab/envs.hpp"

namespace gdnlab {

namespace {
constexpr int kDr[4] = {-1, 0, 1, 0};  // N E S W
constexpr int kDc[4] = {0, 1, 0, -1};
constexpr int kSpawnSpacing = 3;  // drones launch from a loose 2x2 pad at the field center

double pair_distance(const Cell& a, const Cell& b, bool euclidean) {
  if (euclidean)
    return std::hypot(static_cast<double>(a.first - b.first),
                      static_cast<double>(a.second - b.second));
  return static_cast<double>(manhattan(a.first, a.second, b.first, b.second));
}
}  // namespace

DroneScatterEnv::DroneScatterEnv(const EnvConfig& config) : config_(config) {}

StepResult DroneScatterEnv::reset(Rng& rng) {
  timestep_ = 0;
  done_ = false;
  found_ = false;
  steps_taken_ = config_.max_steps;
  pairwise_accum_ = 0.0;
  pairwise_samples_ = 0;
  reward_sum_ = 0.0;
  last_action_.assign(config_.nagents, -1);

  const int anchor = (config_.dim - 1 - kSpawnSpacing) / 2;
  if (anchor < 1 || anchor + kSpawnSpacing > config_.dim - 2)
    throw EnvError("field too small for the spawn pad");
  drones_ = {{anchor, anchor},
             {anchor, anchor + kSpawnSpacing},
             {anchor + kSpawnSpacing, anchor},
             {anchor + kSpawnSpacing, anchor + kSpawnSpacing}};

  // the spawn area is the whole pad rectangle, not just the occupied cells
  std::vector<Cell> candidates;
  for (int r = 0; r < config_.dim; ++r) {
    for (int c = 0; c < config_.dim; ++c) {
      bool far_enough = true;
      for (int pr = anchor; pr <= anchor + kSpawnSpacing; ++pr)
        for (int pc = anchor; pc <= anchor + kSpawnSpacing; ++pc)
          if (chebyshev(r, c, pr, pc) < config_.min_target_distance) far_enough = false;
      if (far_enough) candidates.push_back({r, c});
    }
  }
  if (candidates.empty()) throw EnvError("no valid target cell for min_target_distance");
  target_ = candidates[rng.uniform_int(static_cast<int>(candidates.size()))];

  // the spawn formation counts as the first time sample
  pairwise_accum_ = mean_pairwise_distance();
  pairwise_samples_ = 1;
  return observe(std::vector<double>(config_.nagents, 0.0));
}

StepResult DroneScatterEnv::step(const std::vector<int>& actions) {
  if (done_) throw EnvError("step on finished episode");
  if (static_cast<int>(actions.size()) != config_.nagents)
    throw EnvError("one action per agent required");
  const int n = config_.nagents;

  std::vector<Cell> dest(n);
  std::vector<char> blocked(n, 0), granted(n, 0);
  for (int i = 0; i < n; ++i) {
    const int action = actions[i];
    if (action < 0 || action >= n_actions()) throw EnvError("drone_scatter action out of range");
    dest[i] = {drones_[i].first + kDr[action], drones_[i].second + kDc[action]};
    if (dest[i].first < 0 || dest[i].first >= config_.dim || dest[i].second < 0 ||
        dest[i].second >= config_.dim)
      blocked[i] = 1;
  }

  // Drones occupy distinct cells; moves resolve through vacancy chains and
  // deadlocked cycles stay put.
  bool progress = true;
  while (progress) {
    progress = false;
    for (int i = 0; i < n; ++i) {
      if (granted[i] || blocked[i]) continue;
      bool free_cell = true;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        if (!granted[j] && drones_[j] == dest[i]) free_cell = false;  // still occupied
        if (granted[j] && dest[j] == dest[i]) free_cell = false;      // already claimed
      }
      if (free_cell) {
        granted[i] = 1;
        progress = true;
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (granted[i]) drones_[i] = dest[i];
    last_action_[i] = actions[i];
  }

  ++timestep_;
  for (const Cell& d : drones_) {
    if (manhattan(d.first, d.second, target_.first, target_.second) <= config_.find_range)
      found_ = true;
  }

  const bool euclid = config_.distance_metric == "euclidean";
  std::vector<double> rewards(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double dist_sum = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) dist_sum += pair_distance(drones_[i], drones_[j], euclid);
    rewards[i] = config_.ds_split_reward * dist_sum / (n - 1);
    if (found_) rewards[i] += config_.ds_find_reward;
  }

  pairwise_accum_ += mean_pairwise_distance();
  ++pairwise_samples_;

  if (found_) {
    steps_taken_ = timestep_;
    done_ = true;
  } else if (timestep_ >= config_.max_steps) {
    steps_taken_ = config_.max_steps;
    done_ = true;
  }
  return observe(std::move(rewards));
}

double DroneScatterEnv::mean_pairwise_distance() const {
  const bool euclid = config_.distance_metric == "euclidean";
  double sum = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < drones_.size(); ++i)
    for (std::size_t j = i + 1; j < drones_.size(); ++j) {
      sum += pair_distance(drones_[i], drones_[j], euclid);
      ++pairs;
    }
  return pairs ? sum / pairs : 0.0;
}

StepResult DroneScatterEnv::observe(std::vector<double> rewards) {
  StepResult result;
  result.obs = Mat(config_.nagents, obs_dim());
  result.active.assign(config_.nagents, 1);
  for (int i = 0; i < config_.nagents; ++i) {
    const auto [r, c] = drones_[i];
    int k = 0;
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) {
        const int rr = r + dr, cc = c + dc;
        const bool fence = rr < 0 || rr >= config_.dim || cc < 0 || cc >= config_.dim;
        result.obs(i, k++) = fence ? 1.0 : 0.0;
      }
    if (last_action_[i] >= 0) result.obs(i, k + last_action_[i]) = 1.0;
  }
  for (double r : rewards) reward_sum_ += r;
  result.rewards = std::move(rewards);
  result.done = done_;
  result.comm_mask = comm_graph();
  return result;
}

CommMask DroneScatterEnv::comm_graph() const {
  return range_comm_mask(drones_, std::vector<std::uint8_t>(config_.nagents, 1),
                         config_.comm_range);
}

std::vector<MetricDecl> DroneScatterEnv::metric_decls() const {
  return {{"steps_taken", MetricPolarity::kLowerBetter},
          {"pairwise_distance", MetricPolarity::kHigherBetter},
          {"success", MetricPolarity::kHigherBetter},
          {"reward_sum", MetricPolarity::kHigherBetter},
          {"reward_mean", MetricPolarity::kHigherBetter}};
}

Metrics DroneScatterEnv::episode_metrics() const {
  if (!done_) throw EnvError("episode_metrics before episode end");
  return {{"steps_taken", static_cast<double>(steps_taken_)},
          {"pairwise_distance", pairwise_samples_ ? pairwise_accum_ / pairwise_samples_ : 0.0},
          {"success", found_ ? 1.0 : 0.0},
          {"reward_sum", reward_sum_},
          {"reward_mean", reward_sum_ / config_.nagents}};
}

}  // namespace gdnlab
