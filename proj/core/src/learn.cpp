#include "gdnlab/learn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gdnlab {

void TrainConfig::validate() const {
  if (lrate <= 0.0) throw std::invalid_argument("lrate must be positive");
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("gamma must be in [0, 1]");
  if (batch_size < 1 || epoch_size < 1) throw std::invalid_argument("batch sizes must be >= 1");
  if (dgn_batch_size < 1) throw std::invalid_argument("dgn_batch_size must be >= 1");
  if (buffer_capacity < 1) throw std::invalid_argument("buffer_capacity must be >= 1");
  if (epsilon_min > epsilon_start)
    throw std::invalid_argument("epsilon_min must not exceed epsilon_start");
}

double epsilon_for(long long episode, const TrainConfig& cfg) {
  if (episode < 0) throw std::invalid_argument("episode must be >= 0");
  return std::max(cfg.epsilon_min, cfg.epsilon_start - static_cast<double>(episode) * cfg.epsilon_step);
}

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw std::invalid_argument("buffer capacity must be >= 1");
  entries_.reserve(capacity);
}

void ReplayBuffer::add(Experience e) {
  if (size() < capacity_) {
    entries_.push_back(std::move(e));
  } else {
    entries_[head_] = std::move(e);  // evict oldest
    head_ = (head_ + 1) % capacity_;
  }
}

std::vector<const Experience*> ReplayBuffer::sample(int count, Rng& rng) const {
  if (count > size()) throw std::invalid_argument("sample larger than buffer");
  // partial Fisher-Yates over indices
  std::vector<int> idx(size());
  for (int i = 0; i < size(); ++i) idx[i] = i;
  std::vector<const Experience*> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const int j = i + rng.uniform_int(size() - i);
    std::swap(idx[i], idx[j]);
    out.push_back(&entries_[idx[i]]);
  }
  return out;
}

std::vector<std::vector<double>> returns_to_go(const std::vector<std::vector<double>>& rewards,
                                               double gamma) {
  std::vector<std::vector<double>> returns(rewards.size());
  if (rewards.empty()) return returns;
  const int T = static_cast<int>(rewards.size());
  std::vector<double> acc(rewards[0].size(), 0.0);
  for (int t = T - 1; t >= 0; --t) {
    returns[t].resize(rewards[t].size());
    for (std::size_t i = 0; i < rewards[t].size(); ++i) {
      acc[i] = rewards[t][i] + gamma * acc[i];
      returns[t][i] = acc[i];
    }
  }
  return returns;
}

A2cStats a2c_update(GdnModel& model, const std::vector<EpisodeData>& episodes,
                    const TrainConfig& cfg) {
  if (episodes.empty()) throw std::invalid_argument("a2c_update needs at least one episode");
  if (model.vhead_w < 0) throw std::invalid_argument("a2c_update needs a value head");
  model.params.zero_grads();
  A2cStats stats;

  for (const EpisodeData& episode : episodes) {
    const auto returns = returns_to_go(episode.rewards, cfg.gamma);
    Tape tape;
    Tape::Id hidden = -1;
    Tape::Id loss = tape.input(Mat(1, 1));

    for (int t = 0; t < episode.steps(); ++t) {
      const int n = episode.obs[t].rows;
      const ForwardNodes nodes =
          forward_on_tape(tape, model, episode.comms[t], tape.input(episode.obs[t]), hidden);
      hidden = nodes.hidden;

      std::vector<std::pair<int, int>> picked;
      std::vector<int> agents;
      for (int i = 0; i < n; ++i) {
        if (!episode.active[t][i]) continue;
        picked.push_back({i, episode.actions[t][i]});
        agents.push_back(i);
      }
      if (picked.empty()) continue;
      const int k = static_cast<int>(picked.size());

      const Mat& values = tape.value(nodes.value);
      Mat neg_adv(k, 1), ret(k, 1);
      for (int m = 0; m < k; ++m) {
        const double r = returns[t][agents[m]];
        neg_adv(m, 0) = -(r - values(agents[m], 0));  // constant for the policy term
        ret(m, 0) = r;
      }

      Tape::Id logp = tape.pick(tape.log_softmax_rows(nodes.outputs), picked);
      Tape::Id policy_term = tape.sum_all(tape.hadamard(logp, tape.input(neg_adv)));
      stats.policy_loss += tape.value(policy_term)(0, 0);

      std::vector<std::pair<int, int>> value_picks;
      for (int i : agents) value_picks.push_back({i, 0});
      Tape::Id err = tape.sub(tape.pick(nodes.value, value_picks), tape.input(ret));
      Tape::Id value_term = tape.scale(tape.sum_all(tape.hadamard(err, err)), cfg.value_coeff);
      stats.value_loss += tape.value(value_term)(0, 0);

      loss = tape.add(loss, tape.add(policy_term, value_term));
      if (cfg.entropy_coeff > 0.0) {
        // entropy bonus: adds coeff * sum p log p over active agents
        const Mat& logits = tape.value(nodes.outputs);
        std::vector<std::uint8_t> full(static_cast<std::size_t>(logits.rows) * logits.cols, 0);
        for (int i : agents)
          for (int a = 0; a < logits.cols; ++a) full[static_cast<std::size_t>(i) * logits.cols + a] = 1;
        Tape::Id probs = tape.masked_softmax_rows(nodes.outputs, full);
        Tape::Id ent = tape.sum_all(tape.hadamard(probs, tape.log_softmax_rows(nodes.outputs)));
        loss = tape.add(loss, tape.scale(ent, cfg.entropy_coeff));
      }
      stats.steps += 1;
    }
    tape.backward(loss);
  }

  stats.grad_norm = model.params.grad_norm();
  model.params.sgd_step(cfg.lrate, cfg.grad_clip);
  return stats;
}

namespace {

AttributedGraph comm_graph_of(const CommMask& mask) { return graph_from_mask(mask); }

}  // namespace

std::optional<DqnStats> dqn_update(GdnModel& model, GdnModel& target, const ReplayBuffer& buffer,
                                   const TrainConfig& cfg, Rng& rng) {
  if (buffer.size() < cfg.dgn_batch_size) return std::nullopt;
  const auto batch = buffer.sample(cfg.dgn_batch_size, rng);
  model.params.zero_grads();

  double total_loss = 0.0;
  for (const Experience* exp : batch) {
    const int n = exp->obs.rows;
    int active_count = 0;
    for (int i = 0; i < n; ++i) active_count += exp->active[i] ? 1 : 0;
    if (active_count == 0) continue;

    // targets from the frozen network
    Mat next_q;
    {
      const ForwardResult next = forward(target, comm_graph_of(exp->next_comm), exp->next_obs);
      next_q = next.outputs;
    }
    std::vector<std::pair<int, int>> picked;
    std::vector<double> ys;
    for (int i = 0; i < n; ++i) {
      if (!exp->active[i]) continue;
      picked.push_back({i, exp->actions[i]});
      double y = exp->rewards[i];
      if (!exp->terminal && exp->next_active[i]) {
        double best = next_q(i, 0);
        for (int a = 1; a < next_q.cols; ++a) best = std::max(best, next_q(i, a));
        y += cfg.gamma * best;
      }
      ys.push_back(y);
    }

    Tape tape;
    const ForwardNodes nodes =
        forward_on_tape(tape, model, comm_graph_of(exp->comm), tape.input(exp->obs));
    Mat target_col(static_cast<int>(ys.size()), 1);
    for (std::size_t m = 0; m < ys.size(); ++m) target_col(static_cast<int>(m), 0) = ys[m];
    Tape::Id err = tape.sub(tape.pick(nodes.outputs, picked), tape.input(target_col));
    const double scale = 1.0 / (static_cast<double>(cfg.dgn_batch_size) * active_count);
    Tape::Id loss = tape.scale(tape.sum_all(tape.hadamard(err, err)), scale);
    total_loss += tape.value(loss)(0, 0);
    tape.backward(loss);
  }

  model.params.sgd_step(cfg.lrate, cfg.grad_clip);
  return DqnStats{total_loss};
}

void imitation_interleave(ReplayBuffer& buffer, const std::function<Experience()>& expert,
                          const std::function<Experience()>& normal, int cycles,
                          const TrainConfig& cfg) {
  for (int cycle = 0; cycle < cycles; ++cycle) {
    for (int i = 0; i < cfg.num_normal_experiences; ++i) buffer.add(normal());
    for (int i = 0; i < cfg.num_imitation_experiences; ++i) buffer.add(expert());
  }
}

}  // namespace gdnlab
