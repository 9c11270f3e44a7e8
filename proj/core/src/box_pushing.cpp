#include <algorithm>
#include <deque>
#include <set>

#include "gdnlab/envs.hpp"

namespace gdnlab {

namespace {

constexpr int kDr[4] = {-1, 0, 1, 0};  // N E S W
constexpr int kDc[4] = {0, 1, 0, -1};

// Robot offsets around a box anchor, ordered as a ring. With the taxicab
// communication radius of 3 used for attached robots, consecutive ring
// positions are in range and every chord is out of range, so a small box
// yields exactly C4 and a large box exactly C8.
const std::vector<Cell> kSmallRing = {{-1, 0}, {0, 2}, {2, 1}, {1, -1}};
const std::vector<Cell> kLargeRingH = {{-1, -1}, {-1, 1}, {-1, 3}, {0, 4},
                                       {2, 4},   {2, 2},  {2, 0}, {1, -1}};

constexpr int kAttachedCommRange = 3;  // taxicab; free robots are a clique

Cell transpose(const Cell& c) { return {c.second, c.first}; }

}  // namespace

BoxPushingEnv::BoxPushingEnv(const EnvConfig& config) : config_(config) {}

int BoxPushingEnv::obs_dim() const {
  // attached flag, position, 3x3 x (box, robot, clearing), last action
  return 1 + 2 + 27 + 9;
}

bool BoxPushingEnv::in_clearing(const Cell& cell) const {
  const int w = clearing_width();
  return cell.first < w || cell.first >= config_.dim - w || cell.second < w ||
         cell.second >= config_.dim - w;
}

int BoxPushingEnv::steps_to_clear(const Box& box, int dir) const {
  for (int k = 0; k <= config_.dim; ++k) {
    bool all_clear = true, in_bounds = true;
    for (const Cell& cell : box.cells) {
      const Cell moved{cell.first + k * kDr[dir], cell.second + k * kDc[dir]};
      if (moved.first < 0 || moved.first >= config_.dim || moved.second < 0 ||
          moved.second >= config_.dim)
        in_bounds = false;
      if (!in_clearing(moved)) all_clear = false;
    }
    if (!in_bounds) return -1;
    if (all_clear) return k;
  }
  return -1;
}

StepResult BoxPushingEnv::reset(Rng& rng) {
  timestep_ = 0;
  done_ = false;
  reward_sum_ = 0.0;
  cleared_boxes_ = 0;
  boxes_.clear();
  robots_.clear();
  attached_to_.assign(config_.nagents, -1);
  last_action_.assign(config_.nagents, -1);

  const int lo = clearing_width();
  const int hi = config_.dim - clearing_width() - 1;  // central square is [lo, hi]^2

  auto add_box = [&](const Cell& anchor, bool large, bool vertical) {
    Box box;
    box.large = large;
    const int rows = large && vertical ? 4 : 2;
    const int cols = large && !vertical ? 4 : 2;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) box.cells.push_back({anchor.first + r, anchor.second + c});
    const auto& ring = large ? kLargeRingH : kSmallRing;
    for (const Cell& off : ring) {
      const Cell o = large && vertical ? transpose(off) : off;
      const int robot = static_cast<int>(robots_.size());
      robots_.push_back({anchor.first + o.first, anchor.second + o.second});
      attached_to_[robot] = static_cast<int>(boxes_.size());
      box.robots.push_back(robot);
    }
    boxes_.push_back(std::move(box));
  };

  const bool large_scenario = rng.bernoulli(0.5);
  if (large_scenario) {
    const bool vertical = rng.bernoulli(0.5);
    const int rmax = vertical ? hi - 3 : hi - 1;
    const int cmax = vertical ? hi - 1 : hi - 3;
    add_box({rng.uniform_int(lo, rmax), rng.uniform_int(lo, cmax)}, true, vertical);
    spawned_boxes_ = 1;
  } else {
    // two small boxes whose robot rings must stay out of each other's
    // communication range
    std::vector<std::pair<Cell, Cell>> valid;
    for (int r1 = lo; r1 <= hi - 1; ++r1)
      for (int c1 = lo; c1 <= hi - 1; ++c1)
        for (int r2 = lo; r2 <= hi - 1; ++r2)
          for (int c2 = lo; c2 <= hi - 1; ++c2) {
            if (std::make_pair(r1, c1) >= std::make_pair(r2, c2)) continue;
            int min_dist = 1 << 20;
            for (const Cell& o1 : kSmallRing)
              for (const Cell& o2 : kSmallRing)
                min_dist = std::min(min_dist, manhattan(r1 + o1.first, c1 + o1.second,
                                                        r2 + o2.first, c2 + o2.second));
            if (min_dist > kAttachedCommRange) valid.push_back({{r1, c1}, {r2, c2}});
          }
    const auto& [a, b] = valid[rng.uniform_int(static_cast<int>(valid.size()))];
    add_box(a, false, false);
    add_box(b, false, false);
    spawned_boxes_ = 2;
  }

  // free roamers spawn in the clearing area out of range of every attached robot
  std::vector<Cell> candidates;
  for (int r = 0; r < config_.dim; ++r)
    for (int c = 0; c < config_.dim; ++c) {
      if (!in_clearing({r, c})) continue;
      bool ok = true;
      for (const Cell& robot : robots_)
        if (manhattan(r, c, robot.first, robot.second) <= kAttachedCommRange + 1) ok = false;
      if (ok) candidates.push_back({r, c});
    }
  while (static_cast<int>(robots_.size()) < config_.nagents) {
    const Cell cell = candidates[rng.uniform_int(static_cast<int>(candidates.size()))];
    if (std::find(robots_.begin(), robots_.end(), cell) != robots_.end()) continue;
    robots_.push_back(cell);
  }
  return observe(std::vector<double>(config_.nagents, 0.0));
}

bool BoxPushingEnv::cell_free(const Cell& cell, int ignore_box) const {
  if (cell.first < 0 || cell.first >= config_.dim || cell.second < 0 ||
      cell.second >= config_.dim)
    return false;
  for (int b = 0; b < static_cast<int>(boxes_.size()); ++b) {
    if (b == ignore_box || boxes_[b].cleared) continue;
    if (std::find(boxes_[b].cells.begin(), boxes_[b].cells.end(), cell) != boxes_[b].cells.end())
      return false;
  }
  for (int i = 0; i < static_cast<int>(robots_.size()); ++i) {
    if (ignore_box >= 0 && attached_to_[i] == ignore_box) continue;
    if (robots_[i] == cell) return false;
  }
  return true;
}

void BoxPushingEnv::clear_box(int box_index) {
  Box& box = boxes_[box_index];
  box.cleared = true;
  box.cells.clear();
  for (int robot : box.robots) attached_to_[robot] = -1;
  ++cleared_boxes_;
}

StepResult BoxPushingEnv::step(const std::vector<int>& actions) {
  if (done_) throw EnvError("step on finished episode");
  if (static_cast<int>(actions.size()) != config_.nagents)
    throw EnvError("one action per agent required");
  for (int a : actions)
    if (a < 0 || a >= n_actions()) throw EnvError("box_pushing action out of range");

  std::vector<double> rewards(config_.nagents, 0.0);

  // free robots move first so they can vacate a box's path
  for (int i = 0; i < config_.nagents; ++i) {
    if (attached_to_[i] >= 0 || actions[i] == 0) continue;
    const int dir = (actions[i] - 1) % 4;
    const Cell dest{robots_[i].first + kDr[dir], robots_[i].second + kDc[dir]};
    if (cell_free(dest)) robots_[i] = dest;
  }

  for (int b = 0; b < static_cast<int>(boxes_.size()); ++b) {
    Box& box = boxes_[b];
    if (box.cleared) continue;

    int dir = -1;
    bool unanimous = true;
    for (int robot : box.robots) {
      const int a = actions[robot];
      const bool power = a >= 5;
      if (a == 0 || power != box.large) {
        unanimous = false;
        break;
      }
      const int d = power ? a - 5 : a - 1;
      if (dir == -1) dir = d;
      if (d != dir) unanimous = false;
    }

    bool moved = false;
    if (unanimous && dir >= 0) {
      bool feasible = true;
      std::vector<Cell> new_cells;
      for (const Cell& cell : box.cells) {
        const Cell moved_cell{cell.first + kDr[dir], cell.second + kDc[dir]};
        if (moved_cell.first < 0 || moved_cell.first >= config_.dim || moved_cell.second < 0 ||
            moved_cell.second >= config_.dim)
          feasible = false;
        new_cells.push_back(moved_cell);
      }
      std::vector<Cell> new_robots;
      for (int robot : box.robots) {
        const Cell moved_cell{robots_[robot].first + kDr[dir], robots_[robot].second + kDc[dir]};
        if (moved_cell.first < 0 || moved_cell.first >= config_.dim || moved_cell.second < 0 ||
            moved_cell.second >= config_.dim)
          feasible = false;
        new_robots.push_back(moved_cell);
      }
      if (feasible) {
        // only other boxes and their crews block; free robots get shoved
        for (const Cell& cell : new_cells)
          if (!cell_free(cell, b)) {
            bool free_roamer = false;
            for (int i = 0; i < config_.nagents; ++i)
              if (attached_to_[i] < 0 && robots_[i] == cell) free_roamer = true;
            if (!free_roamer) feasible = false;
          }
        for (const Cell& cell : new_robots)
          if (!cell_free(cell, b)) {
            bool free_roamer = false;
            for (int i = 0; i < config_.nagents; ++i)
              if (attached_to_[i] < 0 && robots_[i] == cell) free_roamer = true;
            if (!free_roamer) feasible = false;
          }
      }
      if (feasible) {
        int dist_before = 1 << 20, dist_after = 1 << 20;
        for (int d = 0; d < 4; ++d) {
          const int s = steps_to_clear(box, d);
          if (s >= 0) dist_before = std::min(dist_before, s);
        }
        box.cells = std::move(new_cells);
        for (std::size_t k = 0; k < box.robots.size(); ++k) robots_[box.robots[k]] = new_robots[k];
        moved = true;

        // displace free roamers caught in the new footprint
        for (int i = 0; i < config_.nagents; ++i) {
          if (attached_to_[i] >= 0) continue;
          bool caught = std::find(box.cells.begin(), box.cells.end(), robots_[i]) !=
                        box.cells.end();
          for (int robot : box.robots) caught = caught || robots_[robot] == robots_[i];
          if (!caught) continue;
          std::deque<Cell> queue{robots_[i]};
          std::set<Cell> seen{robots_[i]};
          while (!queue.empty()) {
            const Cell cur = queue.front();
            queue.pop_front();
            if (cell_free(cur)) {
              robots_[i] = cur;
              break;
            }
            for (int d = 0; d < 4; ++d) {
              const Cell next{cur.first + kDr[d], cur.second + kDc[d]};
              if (next.first < 0 || next.first >= config_.dim || next.second < 0 ||
                  next.second >= config_.dim || seen.count(next))
                continue;
              seen.insert(next);
              queue.push_back(next);
            }
          }
        }

        for (int d = 0; d < 4; ++d) {
          const int s = steps_to_clear(box, d);
          if (s >= 0) dist_after = std::min(dist_after, s);
        }
        if (dist_after < dist_before)
          for (int robot : box.robots) rewards[robot] += config_.bp_move_reward;
        if (dist_after == 0) {
          for (int robot : box.robots) rewards[robot] += config_.bp_clear_reward;
          clear_box(b);
        }
      }
    }
    if (!moved && !box.cleared) {
      for (int robot : box.robots)
        if (actions[robot] != 0) rewards[robot] -= config_.bp_exert_penalty;
    }
  }

  last_action_ = actions;
  ++timestep_;
  done_ = cleared_boxes_ == spawned_boxes_ || timestep_ >= config_.max_steps;
  return observe(std::move(rewards));
}

StepResult BoxPushingEnv::observe(std::vector<double> rewards) {
  StepResult result;
  result.obs = Mat(config_.nagents, obs_dim());
  result.active.assign(config_.nagents, 1);

  for (int i = 0; i < config_.nagents; ++i) {
    const bool is_attached = attached_to_[i] >= 0;
    int k = 0;
    result.obs(i, k++) = is_attached ? 1.0 : 0.0;
    if (!is_attached) {
      // attached robots cannot see around themselves; free robots get
      // position plus a local box / robot / clearing window
      const auto [r, c] = robots_[i];
      result.obs(i, k) = static_cast<double>(r) / config_.dim;
      result.obs(i, k + 1) = static_cast<double>(c) / config_.dim;
      int w = k + 2;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          const Cell cell{r + dr, c + dc};
          bool box_here = false;
          for (const Box& box : boxes_)
            if (!box.cleared &&
                std::find(box.cells.begin(), box.cells.end(), cell) != box.cells.end())
              box_here = true;
          bool robot_here = false;
          for (int j = 0; j < config_.nagents; ++j)
            if (j != i && robots_[j] == cell) robot_here = true;
          const bool clearing_here = cell.first >= 0 && cell.first < config_.dim &&
                                     cell.second >= 0 && cell.second < config_.dim &&
                                     in_clearing(cell);
          result.obs(i, w) = box_here ? 1.0 : 0.0;
          result.obs(i, w + 9) = robot_here ? 1.0 : 0.0;
          result.obs(i, w + 18) = clearing_here ? 1.0 : 0.0;
          ++w;
        }
    }
    if (last_action_[i] >= 0) result.obs(i, 1 + 2 + 27 + last_action_[i]) = 1.0;
  }

  for (double r : rewards) reward_sum_ += r;
  result.rewards = std::move(rewards);
  result.done = done_;
  result.comm_mask = comm_graph();
  return result;
}

CommMask BoxPushingEnv::comm_graph() const {
  const int n = config_.nagents;
  CommMask mask(n, std::vector<std::uint8_t>(n, 0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const bool both_free = attached_to_[i] < 0 && attached_to_[j] < 0;
      if (both_free) {
        mask[i][j] = 1;
      } else if (manhattan(robots_[i].first, robots_[i].second, robots_[j].first,
                           robots_[j].second) <= kAttachedCommRange) {
        mask[i][j] = 1;
      }
    }
  }
  return mask;
}

std::vector<int> BoxPushingEnv::expert_actions() const {
  std::vector<int> actions(config_.nagents, 0);
  for (const Box& box : boxes_) {
    if (box.cleared) continue;
    int best_dir = 0, best_steps = 1 << 20;
    for (int d = 0; d < 4; ++d) {  // tie-break N > E > S > W
      const int s = steps_to_clear(box, d);
      if (s >= 0 && s < best_steps) {
        best_steps = s;
        best_dir = d;
      }
    }
    const int action = box.large ? 5 + best_dir : 1 + best_dir;
    for (int robot : box.robots) actions[robot] = action;
  }
  return actions;
}

std::vector<int> boxpushing_expert(const BoxPushingEnv& env) { return env.expert_actions(); }

std::vector<MetricDecl> BoxPushingEnv::metric_decls() const {
  return {{"ratio_cleared", MetricPolarity::kHigherBetter},
          {"success", MetricPolarity::kHigherBetter},
          {"reward_sum", MetricPolarity::kHigherBetter},
          {"reward_mean", MetricPolarity::kHigherBetter}};
}

Metrics BoxPushingEnv::episode_metrics() const {
  if (!done_) throw EnvError("episode_metrics before episode end");
  return {{"ratio_cleared", static_cast<double>(cleared_boxes_) / spawned_boxes_},
          {"success", cleared_boxes_ == spawned_boxes_ ? 1.0 : 0.0},
          {"reward_sum", reward_sum_},
          {"reward_mean", reward_sum_ / config_.nagents}};
}

}  // namespace gdnlab
