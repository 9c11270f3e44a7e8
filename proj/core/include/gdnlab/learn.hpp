#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "gdnlab/env.hpp"
#include "gdnlab/model.hpp"

namespace gdnlab {

struct TrainConfig {
  double lrate = 0.001;
  double gamma = 1.0;
  double value_coeff = 0.01;
  double entropy_coeff = 0.0;
  int batch_size = 500;    // environment steps per policy update
  int epoch_size = 10;     // update iterations per epoch
  int dgn_batch_size = 128;
  int update_interval = 5; // episodes between value-learning training events
  int train_steps = 5;     // gradient steps per training event
  double epsilon_start = 1.0;
  double epsilon_min = 0.1;
  double epsilon_step = 2e-5;
  int buffer_capacity = 40000;
  double grad_clip = 5.0;
  int num_imitation_experiences = 100;
  int num_normal_experiences = 500;

  void validate() const;
};

double epsilon_for(long long episode, const TrainConfig& cfg);

struct Experience {
  Mat obs;
  std::vector<int> actions;
  Mat next_obs;
  std::vector<double> rewards;
  CommMask comm;
  CommMask next_comm;
  std::vector<std::uint8_t> active;
  std::vector<std::uint8_t> next_active;
  bool terminal = false;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity);

  void add(Experience e);
  int size() const { return static_cast<int>(entries_.size()); }
  int capacity() const { return capacity_; }
  const Experience& at(int i) const { return entries_[(head_ + i) % size()]; }

  // uniform without replacement within one batch
  std::vector<const Experience*> sample(int count, Rng& rng) const;

 private:
  int capacity_;
  int head_ = 0;  // oldest entry when full
  std::vector<Experience> entries_;
};

// One collected episode, stored post-augmentation so updates replay the
// exact inputs the policy saw.
struct EpisodeData {
  std::vector<Mat> obs;
  std::vector<AttributedGraph> comms;
  std::vector<std::vector<int>> actions;
  std::vector<std::vector<double>> rewards;
  std::vector<std::vector<std::uint8_t>> active;

  int steps() const { return static_cast<int>(obs.size()); }
};

std::vector<std::vector<double>> returns_to_go(const std::vector<std::vector<double>>& rewards,
                                               double gamma);

struct A2cStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double grad_norm = 0.0;
  int steps = 0;
};

// loss = -sum log pi(a|o) * (R - V) + value_coeff * sum (V - R)^2, advantages
// constant w.r.t. the policy term; one clipped SGD step.
A2cStats a2c_update(GdnModel& model, const std::vector<EpisodeData>& episodes,
                    const TrainConfig& cfg);

struct DqnStats {
  double loss = 0.0;
};

// One minibatch TD step against the target network; std::nullopt signals an
// underfilled buffer (skip).
std::optional<DqnStats> dqn_update(GdnModel& model, GdnModel& target, const ReplayBuffer& buffer,
                                   const TrainConfig& cfg, Rng& rng);

// Per cycle: num_normal_experiences from `normal`, then num_imitation_experiences
// from `expert`, pushed into the buffer in stream order.
void imitation_interleave(ReplayBuffer& buffer, const std::function<Experience()>& expert,
                          const std::function<Experience()>& normal, int cycles,
                          const TrainConfig& cfg);

}  // namespace gdnlab
