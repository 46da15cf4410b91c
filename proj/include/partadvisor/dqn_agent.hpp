#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "partadvisor/mdp.hpp"
#include "partadvisor/mlp.hpp"

namespace partadvisor {

struct AgentConfig {
  std::vector<int> hidden_layers{128, 64};
  double learning_rate = 5e-4;
  double gamma = 0.99;
  double tau = 1e-3;
  std::size_t batch_size = 32;
  std::size_t buffer_capacity = 10000;
  double epsilon_start = 1.0;
  double epsilon_decay = 0.997;
};

/// Ring buffer of transitions; evicts oldest first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 10000) : capacity_(capacity) {}

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return items_.at(i); }
  /// min(n, size) distinct transitions drawn uniformly.
  std::vector<const Transition*> sample(std::size_t n, Rng& rng) const;
  void clear() { items_.clear(); }

 private:
  std::size_t capacity_;
  std::deque<Transition> items_;
};

/// epsilon(k) = start * decay^k, advanced once per episode.
class EpsilonSchedule {
 public:
  EpsilonSchedule(double start = 1.0, double decay = 0.997, std::int64_t episode = 0)
      : start_(start), decay_(decay), episode_(episode) {}

  double value() const;
  void advance() { ++episode_; }
  double start() const { return start_; }
  double decay() const { return decay_; }
  std::int64_t episode() const { return episode_; }
  /// A schedule that starts where this one would be after `episodes` episodes.
  EpsilonSchedule skipped(std::int64_t episodes) const;

 private:
  double start_;
  double decay_;
  std::int64_t episode_;
};

/// Masked argmax; ties go to the lowest action id.
int greedy_action(std::span<const double> q_values, const ActionMask& mask);

/// With probability 1 - epsilon the masked argmax of q(s), otherwise a uniformly random
/// legal action. Throws std::invalid_argument when no action is legal.
int select_action(const Mlp& q, std::span<const double> s, const ActionMask& mask, double epsilon, Rng& rng);

/// One gradient step on the mean squared TD error
///   (r_i + gamma * max_{legal a} Q_target(s'_i, a) - Q_online(s_i, a_i))^2.
/// Only `online` moves. Returns the loss before the step.
double train_step(Mlp& online, const Mlp& target, AdamOptimizer& optimizer, std::span<const Transition* const> batch,
                  double gamma);

/// Mean squared TD error and its gradient w.r.t. the online parameters, without stepping.
double td_loss_and_gradient(const Mlp& online, const Mlp& target, std::span<const Transition* const> batch, double gamma,
                            std::span<double> grad);

class DqnAgent {
 public:
  DqnAgent() = default;
  DqnAgent(int input_size, int action_count, AgentConfig config, std::uint64_t seed, std::uint64_t schema_fingerprint);

  const AgentConfig& config() const { return config_; }
  const Mlp& online() const { return online_; }
  const Mlp& target() const { return target_; }
  Mlp& online() { return online_; }
  Mlp& target() { return target_; }
  AdamOptimizer& optimizer() { return optimizer_; }
  ReplayBuffer& replay() { return replay_; }
  EpsilonSchedule& epsilon() { return epsilon_; }
  const EpsilonSchedule& epsilon() const { return epsilon_; }
  Rng& rng() { return rng_; }
  std::uint64_t schema_fingerprint() const { return fingerprint_; }
  void set_schema_fingerprint(std::uint64_t f) { fingerprint_ = f; }
  int input_size() const { return online_.input_size(); }
  int action_count() const { return online_.output_size(); }

  std::vector<double> predict_q(std::span<const double> s) const { return online_.forward(s); }
  int act(std::span<const double> s, const ActionMask& mask) { return select_action(online_, s, mask, epsilon_.value(), rng_); }
  int act_greedy(std::span<const double> s, const ActionMask& mask) const { return greedy_action(online_.forward(s), mask); }

  void remember(Transition t) { replay_.push(std::move(t)); }
  /// Samples a minibatch from the replay buffer and trains; returns the loss (0 if empty).
  double learn();
  /// Decays epsilon and soft-updates the target network.
  void end_episode();

  /// Appends zero-weight input units to both networks and the optimizer state and empties
  /// the replay buffer, whose states have the old width.
  void widen_input(int extra);

  void save(const std::string& path) const;
  /// Throws InputError on a malformed file or a schema fingerprint mismatch.
  static DqnAgent load(const std::string& path, std::uint64_t expected_fingerprint);

 private:
  AgentConfig config_;
  Mlp online_;
  Mlp target_;
  AdamOptimizer optimizer_;
  ReplayBuffer replay_;
  EpsilonSchedule epsilon_;
  Rng rng_;
  std::uint64_t fingerprint_ = 0;
};

}  // namespace partadvisor
