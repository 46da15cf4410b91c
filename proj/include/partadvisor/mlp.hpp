#pragma once

#include <random>
#include <span>
#include <vector>

namespace partadvisor {

using Rng = std::mt19937_64;

/// Fully connected network: ReLU on hidden layers, linear output.
///
/// Parameters live in one flat vector, layer by layer, each layer storing its weight matrix
/// row-major (out x in) followed by its bias vector. The flat view is what the optimizer,
/// soft updates, checkpoints and gradient checks operate on.
class Mlp {
 public:
  Mlp() = default;
  /// Zero-initialized network with the given layer widths (input first, output last).
  explicit Mlp(std::vector<int> layer_sizes);

  /// Weights uniform in +-1/sqrt(fan_in), biases zero.
  void init_fan_in_uniform(Rng& rng);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  /// Activations of every layer from one forward pass, input first.
  struct Tape {
    std::vector<std::vector<double>> activations;
  };

  std::vector<double> forward(std::span<const double> x) const;
  std::vector<double> forward(std::span<const double> x, Tape& tape) const;
  /// Accumulates d(output . grad_output)/d(params) into `grad`.
  void backward(const Tape& tape, std::span<const double> grad_output, std::span<double> grad) const;

  /// Appends `extra` input units whose weights are zero. Existing outputs are unchanged.
  void widen_input(int extra);
  /// Re-lays a flat vector of this network's parameter shape (e.g. optimizer moments) for
  /// widen_input(extra), filling the new positions with zeros.
  std::vector<double> widen_flat(std::span<const double> flat, int extra) const;

  bool operator==(const Mlp&) const = default;

 private:
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + static_cast<std::size_t>(sizes_[layer]) * static_cast<std::size_t>(sizes_[layer + 1]);
  }
  void layout();

  std::vector<int> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

/// Adaptive-moment optimizer over a flat parameter vector.
class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  AdamOptimizer(std::size_t parameter_count, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-7);

  void step(std::span<double> params, std::span<const double> grad);

  double learning_rate() const { return lr_; }
  std::int64_t steps() const { return t_; }
  std::vector<double>& first_moment() { return m_; }
  std::vector<double>& second_moment() { return v_; }
  const std::vector<double>& first_moment() const { return m_; }
  const std::vector<double>& second_moment() const { return v_; }
  void set_steps(std::int64_t t) { t_ = t; }

 private:
  double lr_ = 5e-4;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-7;
  std::int64_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

/// target <- (1 - tau) target + tau online
void soft_update(Mlp& target, const Mlp& online, double tau);

}  // namespace partadvisor
