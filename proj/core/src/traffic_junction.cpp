#include <algorithm>
#include <map>

#include "gdnlab/envs.hpp"

namespace gdnlab {

TrafficJunctionEnv::TrafficJunctionEnv(const EnvConfig& config) : config_(config) {
  const int mid = config_.dim / 2;
  std::vector<Cell> east_route, south_route;
  for (int c = 0; c < config_.dim; ++c) east_route.push_back({mid, c});
  for (int r = 0; r < config_.dim; ++r) south_route.push_back({r, mid});
  routes_ = {east_route, south_route};
}

int TrafficJunctionEnv::obs_dim() const {
  // active flag, position one-hot, route one-hot, local occupancy, time in system
  return 1 + config_.dim * config_.dim + static_cast<int>(routes_.size()) + 9 + 1;
}

Cell TrafficJunctionEnv::car_pos(const Car& car) const { return routes_[car.route][car.progress]; }

void TrafficJunctionEnv::spawn_cars() {
  for (int route = 0; route < static_cast<int>(routes_.size()); ++route) {
    if (!rng_.bernoulli(config_.add_rate)) continue;
    auto slot = std::find_if(cars_.begin(), cars_.end(), [](const Car& c) { return !c.active; });
    if (slot == cars_.end()) continue;
    const Cell entry = routes_[route].front();
    bool occupied = false;
    for (const Car& c : cars_)
      if (c.active && car_pos(c) == entry) occupied = true;
    if (occupied) continue;
    *slot = Car{true, route, 0, 0};
  }
}

StepResult TrafficJunctionEnv::reset(Rng& rng) {
  rng_ = rng.fork();
  cars_.assign(config_.nagents, Car{});
  timestep_ = 0;
  collided_ = false;
  done_ = false;
  reward_sum_ = 0.0;
  spawn_cars();
  return observe(std::vector<double>(config_.nagents, 0.0));
}

StepResult TrafficJunctionEnv::step(const std::vector<int>& actions) {
  if (done_) throw EnvError("step on finished episode");
  if (static_cast<int>(actions.size()) != config_.nagents)
    throw EnvError("one action per agent required");
  std::vector<double> rewards(config_.nagents, 0.0);

  for (int i = 0; i < config_.nagents; ++i) {
    Car& car = cars_[i];
    if (!car.active) continue;
    const int action = actions[i];
    if (action != 0 && action != 1) throw EnvError("traffic_junction action must be 0 or 1");
    if (action == 0) ++car.progress;
    if (car.progress >= static_cast<int>(routes_[car.route].size())) {
      car = Car{};  // reached route end, leaves the system
      continue;
    }
    ++car.time_in_system;
  }

  std::map<Cell, int> occupancy;
  for (const Car& car : cars_)
    if (car.active) ++occupancy[car_pos(car)];
  for (int i = 0; i < config_.nagents; ++i) {
    const Car& car = cars_[i];
    if (!car.active) continue;
    rewards[i] -= config_.tj_linger_penalty * car.time_in_system;
    if (occupancy[car_pos(car)] > 1) {
      rewards[i] -= config_.tj_collision_penalty;
      collided_ = true;
    }
  }

  ++timestep_;
  done_ = timestep_ >= config_.max_steps;
  if (!done_) spawn_cars();
  return observe(std::move(rewards));
}

StepResult TrafficJunctionEnv::observe(std::vector<double> rewards) {
  StepResult result;
  result.obs = Mat(config_.nagents, obs_dim());
  result.active.assign(config_.nagents, 0);

  std::map<Cell, int> occupancy;
  for (const Car& car : cars_)
    if (car.active) ++occupancy[car_pos(car)];

  for (int i = 0; i < config_.nagents; ++i) {
    const Car& car = cars_[i];
    if (!car.active) continue;
    result.active[i] = 1;
    const Cell pos = car_pos(car);
    int k = 0;
    result.obs(i, k++) = 1.0;
    result.obs(i, k + pos.first * config_.dim + pos.second) = 1.0;
    k += config_.dim * config_.dim;
    result.obs(i, k + car.route) = 1.0;
    k += static_cast<int>(routes_.size());
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        const Cell cell{pos.first + dr, pos.second + dc};
        auto it = occupancy.find(cell);
        int count = it == occupancy.end() ? 0 : it->second;
        if (cell == pos) --count;  // exclude self
        result.obs(i, k++) = count > 0 ? 1.0 : 0.0;
      }
    }
    result.obs(i, k) = static_cast<double>(car.time_in_system) / config_.max_steps;
  }

  for (double r : rewards) reward_sum_ += r;
  result.rewards = std::move(rewards);
  result.done = done_;
  result.comm_mask = comm_graph();
  return result;
}

CommMask TrafficJunctionEnv::comm_graph() const {
  std::vector<Cell> positions(config_.nagents, {0, 0});
  std::vector<std::uint8_t> active(config_.nagents, 0);
  for (int i = 0; i < config_.nagents; ++i) {
    if (cars_[i].active) {
      positions[i] = car_pos(cars_[i]);
      active[i] = 1;
    }
  }
  return range_comm_mask(positions, active, config_.comm_range);
}

std::vector<MetricDecl> TrafficJunctionEnv::metric_decls() const {
  return {{"success", MetricPolarity::kHigherBetter},
          {"reward_sum", MetricPolarity::kHigherBetter},
          {"reward_mean", MetricPolarity::kHigherBetter}};
}

Metrics TrafficJunctionEnv::episode_metrics() const {
  if (!done_) throw EnvError("episode_metrics before episode end");
  return {{"success", collided_ ? 0.0 : 1.0},
          {"reward_sum", reward_sum_},
          {"reward_mean", reward_sum_ / config_.nagents}};
}

}  // namespace gdnlab
