#include "gdnlab/env.hpp"

#include <algorithm>
#include <cmath>

#include "gdnlab/envs.hpp"

namespace gdnlab {

void EnvConfig::validate() const {
  if (env_name != "traffic_junction" && env_name != "predator_prey" &&
      env_name != "drone_scatter" && env_name != "box_pushing")
    throw EnvError("unknown env_name: " + env_name);
  if (dim <= 0) throw EnvError("dim must be positive");
  if (nagents < 1) throw EnvError("nagents must be >= 1");
  if (max_steps < 1) throw EnvError("max_steps must be >= 1");
  if (vision < 0) throw EnvError("vision must be >= 0");
  if (add_rate < 0.0 || add_rate > 1.0) throw EnvError("add_rate must be in [0, 1]");
  if (distance_metric != "manhattan" && distance_metric != "euclidean")
    throw EnvError("distance_metric must be manhattan or euclidean");
  if (env_name == "drone_scatter") {
    if (nagents != 4) throw EnvError("drone_scatter uses exactly 4 drones");
    if (find_range < 0) throw EnvError("find_range must be >= 0");
    if (min_target_distance < 1) throw EnvError("min_target_distance must be >= 1");
  }
  if (env_name == "box_pushing") {
    if (nagents != 10) throw EnvError("box_pushing uses exactly 10 robots");
    if (dim < 12) throw EnvError("box_pushing needs dim >= 12");
  }
  if (env_name == "traffic_junction" && dim < 4) throw EnvError("traffic_junction needs dim >= 4");
}

EnvConfig EnvConfig::defaults_for(const std::string& env_name) {
  EnvConfig c;
  c.env_name = env_name;
  if (env_name == "traffic_junction") {
    c.dim = 6;
    c.nagents = 5;
    c.vision = 1;
    c.max_steps = 20;
    c.comm_range = 3;
    c.add_rate = 0.3;
    c.difficulty = "easy";
  } else if (env_name == "predator_prey") {
    c.dim = 10;
    c.nagents = 5;
    c.vision = 1;
    c.max_steps = 40;
    c.comm_range = 5;
    c.mode = "cooperative";
  } else if (env_name == "drone_scatter") {
    c.dim = 20;
    c.nagents = 4;
    c.vision = 1;
    c.max_steps = 20;
    c.comm_range = 10;
    c.find_range = 3;
    c.min_target_distance = 3;
    c.difficulty = "easy";
  } else if (env_name == "box_pushing") {
    c.dim = 12;
    c.nagents = 10;
    c.vision = 1;
    c.max_steps = 20;
    c.difficulty = "easy";
  } else {
    throw EnvError("unknown env_name: " + env_name);
  }
  return c;
}

int chebyshev(int r1, int c1, int r2, int c2) {
  return std::max(std::abs(r1 - r2), std::abs(c1 - c2));
}

int manhattan(int r1, int c1, int r2, int c2) { return std::abs(r1 - r2) + std::abs(c1 - c2); }

CommMask range_comm_mask(const std::vector<std::pair<int, int>>& positions,
                         const std::vector<std::uint8_t>& active, int range) {
  const int n = static_cast<int>(positions.size());
  CommMask mask(n, std::vector<std::uint8_t>(n, 0));
  for (int i = 0; i < n; ++i) {
    if (!active[i]) continue;
    for (int j = 0; j < n; ++j) {
      if (i == j || !active[j]) continue;
      if (chebyshev(positions[i].first, positions[i].second, positions[j].first,
                    positions[j].second) <= range)
        mask[i][j] = 1;
    }
  }
  return mask;
}

std::unique_ptr<Env> make_env(const EnvConfig& config) {
  config.validate();
  if (config.env_name == "traffic_junction") return std::make_unique<TrafficJunctionEnv>(config);
  if (config.env_name == "predator_prey") return std::make_unique<PredatorPreyEnv>(config);
  if (config.env_name == "drone_scatter") return std::make_unique<DroneScatterEnv>(config);
  return std::make_unique<BoxPushingEnv>(config);
}

}  // namespace gdnlab
