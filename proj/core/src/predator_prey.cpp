#include <algorithm>

#include "gdnlab/envs.hpp"

namespace gdnlab {

namespace {
constexpr int kDr[4] = {-1, 0, 1, 0};  // N E S W
constexpr int kDc[4] = {0, 1, 0, -1};
}  // namespace

PredatorPreyEnv::PredatorPreyEnv(const EnvConfig& config) : config_(config) {}

int PredatorPreyEnv::obs_dim() const {
  // own position, on-prey flag, 3x3 prey window, 3x3 other-predator window
  return 2 + 1 + 9 + 9;
}

StepResult PredatorPreyEnv::reset(Rng& rng) {
  timestep_ = 0;
  done_ = false;
  success_ = false;
  reward_sum_ = 0.0;
  predators_.clear();
  on_prey_.assign(config_.nagents, 0);

  std::vector<Cell> used;
  auto sample_free = [&]() {
    while (true) {
      Cell cell{rng.uniform_int(config_.dim), rng.uniform_int(config_.dim)};
      if (std::find(used.begin(), used.end(), cell) == used.end()) {
        used.push_back(cell);
        return cell;
      }
    }
  };
  prey_ = sample_free();
  for (int i = 0; i < config_.nagents; ++i) predators_.push_back(sample_free());
  return observe(std::vector<double>(config_.nagents, 0.0));
}

StepResult PredatorPreyEnv::step(const std::vector<int>& actions) {
  if (done_) throw EnvError("step on finished episode");
  if (static_cast<int>(actions.size()) != config_.nagents)
    throw EnvError("one action per agent required");

  for (int i = 0; i < config_.nagents; ++i) {
    const int action = actions[i];
    if (action < 0 || action >= n_actions()) throw EnvError("predator_prey action out of range");
    if (on_prey_[i] || action == 4) continue;  // predators on the prey sit still
    const int r = predators_[i].first + kDr[action];
    const int c = predators_[i].second + kDc[action];
    if (r >= 0 && r < config_.dim && c >= 0 && c < config_.dim) predators_[i] = {r, c};
  }

  int on_prey_count = 0;
  for (int i = 0; i < config_.nagents; ++i) {
    if (predators_[i] == prey_) on_prey_[i] = 1;
    on_prey_count += on_prey_[i];
  }

  std::vector<double> rewards(config_.nagents, 0.0);
  for (int i = 0; i < config_.nagents; ++i)
    rewards[i] = -config_.pp_living_penalty + config_.pp_on_prey_reward * on_prey_count;

  ++timestep_;
  success_ = on_prey_count == config_.nagents;
  done_ = success_ || timestep_ >= config_.max_steps;
  return observe(std::move(rewards));
}

StepResult PredatorPreyEnv::observe(std::vector<double> rewards) {
  StepResult result;
  result.obs = Mat(config_.nagents, obs_dim());
  result.active.assign(config_.nagents, 1);
  const int v = config_.vision;

  for (int i = 0; i < config_.nagents; ++i) {
    const auto [pr, pc] = predators_[i];
    int k = 0;
    result.obs(i, k++) = static_cast<double>(pr) / config_.dim;
    result.obs(i, k++) = static_cast<double>(pc) / config_.dim;
    result.obs(i, k++) = on_prey_[i] ? 1.0 : 0.0;
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) {
        const bool visible = std::max(std::abs(dr), std::abs(dc)) <= v;
        const Cell cell{pr + dr, pc + dc};
        result.obs(i, k++) = (visible && cell == prey_) ? 1.0 : 0.0;
      }
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) {
        const bool visible = std::max(std::abs(dr), std::abs(dc)) <= v;
        double others = 0.0;
        if (visible) {
          const Cell cell{pr + dr, pc + dc};
          for (int j = 0; j < config_.nagents; ++j)
            if (j != i && predators_[j] == cell) others += 1.0;
        }
        result.obs(i, k++) = others > 0.0 ? 1.0 : 0.0;
      }
  }

  for (double r : rewards) reward_sum_ += r;
  result.rewards = std::move(rewards);
  result.done = done_;
  result.comm_mask = comm_graph();
  return result;
}

CommMask PredatorPreyEnv::comm_graph() const {
  return range_comm_mask(predators_, std::vector<std::uint8_t>(config_.nagents, 1),
                         config_.comm_range);
}

std::vector<MetricDecl> PredatorPreyEnv::metric_decls() const {
  return {{"success", MetricPolarity::kHigherBetter},
          {"reward_sum", MetricPolarity::kHigherBetter},
          {"reward_mean", MetricPolarity::kHigherBetter}};
}

Metrics PredatorPreyEnv::episode_metrics() const {
  if (!done_) throw EnvError("episode_metrics before episode end");
  return {{"success", success_ ? 1.0 : 0.0},
          {"reward_sum", reward_sum_},
          {"reward_mean", reward_sum_ / config_.nagents}};
}

}  // namespace gdnlab
