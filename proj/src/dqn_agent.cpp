#include "partadvisor/dqn_agent.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace partadvisor {

void ReplayBuffer::push(Transition t) {
  if (capacity_ == 0) return;
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(std::move(t));
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  std::vector<const Transition*> out;
  if (items_.size() <= n) {
    for (const auto& t : items_) out.push_back(&t);
    return out;
  }
  // Floyd's algorithm: n distinct indices in O(n).
  std::vector<std::size_t> picked;
  picked.reserve(n);
  for (std::size_t j = items_.size() - n; j < items_.size(); ++j) {
    std::uniform_int_distribution<std::size_t> dist(0, j);
    const std::size_t r = dist(rng);
    picked.push_back(std::find(picked.begin(), picked.end(), r) == picked.end() ? r : j);
  }
  for (std::size_t i : picked) out.push_back(&items_[i]);
  return out;
}

double EpsilonSchedule::value() const { return start_ * std::pow(decay_, static_cast<double>(episode_)); }

EpsilonSchedule EpsilonSchedule::skipped(std::int64_t episodes) const {
  return EpsilonSchedule(start_ * std::pow(decay_, static_cast<double>(episode_ + episodes)), decay_, 0);
}

int greedy_action(std::span<const double> q_values, const ActionMask& mask) {
  int best = -1;
  for (std::size_t a = 0; a < q_values.size(); ++a) {
    if (!mask[a]) continue;
    if (best < 0 || q_values[a] > q_values[static_cast<std::size_t>(best)]) best = static_cast<int>(a);
  }
  if (best < 0) throw std::invalid_argument("no legal action");
  return best;
}

int select_action(const Mlp& q, std::span<const double> s, const ActionMask& mask, double epsilon, Rng& rng) {
  const auto legal = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
  if (legal == 0) throw std::invalid_argument("no legal action");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, legal - 1);
    std::size_t k = pick(rng);
    for (std::size_t a = 0; a < mask.size(); ++a) {
      if (!mask[a]) continue;
      if (k-- == 0) return static_cast<int>(a);
    }
  }
  return greedy_action(q.forward(s), mask);
}

double td_loss_and_gradient(const Mlp& online, const Mlp& target, std::span<const Transition* const> batch, double gamma,
                            std::span<double> grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  if (batch.empty()) return 0.0;
  const double b = static_cast<double>(batch.size());
  double loss = 0.0;
  Mlp::Tape tape;
  std::vector<double> grad_out(static_cast<std::size_t>(online.output_size()), 0.0);
  for (const Transition* t : batch) {
    double y = t->reward;
    if (gamma != 0.0) {
      const auto next_q = target.forward(t->next_state);
      y += gamma * next_q[static_cast<std::size_t>(greedy_action(next_q, t->next_mask))];
    }
    const auto q = online.forward(t->state, tape);
    const auto a = static_cast<std::size_t>(t->action);
    const double delta = q[a] - y;
    loss += delta * delta;
    grad_out[a] = 2.0 * delta / b;
    online.backward(tape, grad_out, grad);
    grad_out[a] = 0.0;
  }
  return loss / b;
}

double train_step(Mlp& online, const Mlp& target, AdamOptimizer& optimizer, std::span<const Transition* const> batch,
                  double gamma) {
  if (batch.empty()) throw std::invalid_argument("empty training batch");
  std::vector<double> grad(online.parameter_count());
  const double loss = td_loss_and_gradient(online, target, batch, gamma, grad);
  optimizer.step(online.parameters(), grad);
  return loss;
}

DqnAgent::DqnAgent(int input_size, int action_count, AgentConfig config, std::uint64_t seed,
                   std::uint64_t schema_fingerprint)
    : config_(std::move(config)),
      replay_(config_.buffer_capacity),
      epsilon_(config_.epsilon_start, config_.epsilon_decay),
      rng_(seed),
      fingerprint_(schema_fingerprint) {
  std::vector<int> sizes{input_size};
  sizes.insert(sizes.end(), config_.hidden_layers.begin(), config_.hidden_layers.end());
  sizes.push_back(action_count);
  online_ = Mlp(sizes);
  online_.init_fan_in_uniform(rng_);
  target_ = online_;
  optimizer_ = AdamOptimizer(online_.parameter_count(), config_.learning_rate);
}

double DqnAgent::learn() {
  if (replay_.size() == 0) return 0.0;
  const auto batch = replay_.sample(config_.batch_size, rng_);
  return train_step(online_, target_, optimizer_, batch, config_.gamma);
}

void DqnAgent::end_episode() {
  epsilon_.advance();
  soft_update(target_, online_, config_.tau);
}

void DqnAgent::widen_input(int extra) {
  optimizer_.first_moment() = online_.widen_flat(optimizer_.first_moment(), extra);
  optimizer_.second_moment() = online_.widen_flat(optimizer_.second_moment(), extra);
  online_.widen_input(extra);
  target_.widen_input(extra);
  replay_.clear();
}

namespace {

constexpr const char* kMagic = "PARTADVISOR-CHECKPOINT";
constexpr int kVersion = 1;

void write_f64_le(std::ostream& out, std::span<const double> values) {
  for (double v : values) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    out.write(bytes, 8);
  }
}

std::vector<double> read_f64_le(std::istream& in, std::size_t count, const std::string& path) {
  std::vector<double> out(count);
  for (auto& v : out) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw InputError("checkpoint '" + path + "' is truncated");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    v = std::bit_cast<double>(bits);
  }
  return out;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

}  // namespace

void DqnAgent::save(const std::string& path) const {
  nlohmann::json header;
  header["version"] = kVersion;
  header["schema_fingerprint"] = hex64(fingerprint_);
  header["layers"] = online_.layer_sizes();
  header["parameter_count"] = online_.parameter_count();
  header["blocks"] = {"online", "target", "adam_m", "adam_v"};
  header["config"] = {{"hidden_layers", config_.hidden_layers}, {"learning_rate", config_.learning_rate},
                      {"gamma", config_.gamma},                 {"tau", config_.tau},
                      {"batch_size", config_.batch_size},       {"buffer_capacity", config_.buffer_capacity},
                      {"epsilon_start", config_.epsilon_start}, {"epsilon_decay", config_.epsilon_decay}};
  header["epsilon"] = {{"start", epsilon_.start()}, {"decay", epsilon_.decay()}, {"episode", epsilon_.episode()}};
  header["adam_steps"] = optimizer_.steps();
  std::ostringstream rng_state;
  rng_state << rng_;
  header["rng"] = rng_state.str();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
  out << kMagic << '\n' << header.dump() << '\n';
  write_f64_le(out, online_.parameters());
  write_f64_le(out, target_.parameters());
  write_f64_le(out, optimizer_.first_moment());
  write_f64_le(out, optimizer_.second_moment());
  if (!out) throw std::runtime_error("failed writing checkpoint '" + path + "'");
}

DqnAgent DqnAgent::load(const std::string& path, std::uint64_t expected_fingerprint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint '" + path + "'");
  std::string magic, header_line;
  std::getline(in, magic);
  if (magic != kMagic) throw InputError("'" + path + "' is not a checkpoint");
  std::getline(in, header_line);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_line);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("checkpoint '" + path + "' has a malformed header: " + e.what());
  }
  try {
    if (header.at("version").get<int>() != kVersion) throw InputError("checkpoint '" + path + "' has an unsupported version");
    if (header.at("schema_fingerprint").get<std::string>() != hex64(expected_fingerprint))
      throw InputError("checkpoint '" + path + "' was trained for a different schema");

    DqnAgent agent;
    const auto& c = header.at("config");
    agent.config_.hidden_layers = c.at("hidden_layers").get<std::vector<int>>();
    agent.config_.learning_rate = c.at("learning_rate").get<double>();
    agent.config_.gamma = c.at("gamma").get<double>();
    agent.config_.tau = c.at("tau").get<double>();
    agent.config_.batch_size = c.at("batch_size").get<std::size_t>();
    agent.config_.buffer_capacity = c.at("buffer_capacity").get<std::size_t>();
    agent.config_.epsilon_start = c.at("epsilon_start").get<double>();
    agent.config_.epsilon_decay = c.at("epsilon_decay").get<double>();
    agent.fingerprint_ = expected_fingerprint;

    const auto layers = header.at("layers").get<std::vector<int>>();
    agent.online_ = Mlp(layers);
    agent.target_ = Mlp(layers);
    const auto n = header.at("parameter_count").get<std::size_t>();
    if (n != agent.online_.parameter_count()) throw InputError("checkpoint '" + path + "' parameter count disagrees with its layers");
    auto online = read_f64_le(in, n, path);
    auto target = read_f64_le(in, n, path);
    std::copy(online.begin(), online.end(), agent.online_.parameters().begin());
    std::copy(target.begin(), target.end(), agent.target_.parameters().begin());
    agent.optimizer_ = AdamOptimizer(n, agent.config_.learning_rate);
    agent.optimizer_.first_moment() = read_f64_le(in, n, path);
    agent.optimizer_.second_moment() = read_f64_le(in, n, path);
    agent.optimizer_.set_steps(header.at("adam_steps").get<std::int64_t>());
    const auto& e = header.at("epsilon");
    agent.epsilon_ = EpsilonSchedule(e.at("start").get<double>(), e.at("decay").get<double>(), e.at("episode").get<std::int64_t>());
    agent.replay_ = ReplayBuffer(agent.config_.buffer_capacity);
    std::istringstream rng_state(header.at("rng").get<std::string>());
    rng_state >> agent.rng_;
    return agent;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("checkpoint '" + path + "' has a malformed header: " + e.what());
  }
}

}  // namespace partadvisor
