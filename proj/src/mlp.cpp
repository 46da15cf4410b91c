#include "partadvisor/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace partadvisor {

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("an MLP needs at least an input and an output layer");
  for (int s : sizes_)
    if (s < 1) throw std::invalid_argument("layer widths must be positive");
  layout();
}

void Mlp::layout() {
  offsets_.clear();
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(n);
    n += static_cast<std::size_t>(sizes_[l] + 1) * static_cast<std::size_t>(sizes_[l + 1]);
  }
  params_.assign(n, 0.0);
}

void Mlp::init_fan_in_uniform(Rng& rng) {
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    const std::size_t w = weight_offset(l);
    const std::size_t count = static_cast<std::size_t>(sizes_[l]) * static_cast<std::size_t>(sizes_[l + 1]);
    for (std::size_t i = 0; i < count; ++i) params_[w + i] = dist(rng);
    std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(bias_offset(l)), sizes_[l + 1], 0.0);
  }
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
  Tape tape;
  auto out = forward(x, tape);
  return out;
}

std::vector<double> Mlp::forward(std::span<const double> x, Tape& tape) const {
  if (x.size() != static_cast<std::size_t>(input_size()))
    throw std::invalid_argument("input has " + std::to_string(x.size()) + " values, network expects " +
                                std::to_string(input_size()));
  tape.activations.resize(sizes_.size());
  tape.activations[0].assign(x.begin(), x.end());
  const std::size_t layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto& in = tape.activations[l];
    auto& out = tape.activations[l + 1];
    const auto n_in = static_cast<std::size_t>(sizes_[l]);
    const auto n_out = static_cast<std::size_t>(sizes_[l + 1]);
    out.assign(n_out, 0.0);
    const double* w = params_.data() + weight_offset(l);
    const double* b = params_.data() + bias_offset(l);
    for (std::size_t o = 0; o < n_out; ++o) {
      double z = b[o];
      const double* row = w + o * n_in;
      for (std::size_t i = 0; i < n_in; ++i) z += row[i] * in[i];
      out[o] = (l + 1 < layers) ? std::max(z, 0.0) : z;
    }
  }
  return tape.activations.back();
}

void Mlp::backward(const Tape& tape, std::span<const double> grad_output, std::span<double> grad) const {
  if (grad.size() != params_.size()) throw std::invalid_argument("gradient buffer has the wrong size");
  std::vector<double> delta(grad_output.begin(), grad_output.end());
  std::vector<double> prev;
  for (std::size_t l = sizes_.size() - 1; l-- > 0;) {
    const auto n_in = static_cast<std::size_t>(sizes_[l]);
    const auto n_out = static_cast<std::size_t>(sizes_[l + 1]);
    const auto& in = tape.activations[l];
    const double* w = params_.data() + weight_offset(l);
    double* gw = grad.data() + weight_offset(l);
    double* gb = grad.data() + bias_offset(l);
    prev.assign(n_in, 0.0);
    for (std::size_t o = 0; o < n_out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      gb[o] += d;
      double* grow = gw + o * n_in;
      const double* row = w + o * n_in;
      for (std::size_t i = 0; i < n_in; ++i) {
        grow[i] += d * in[i];
        prev[i] += d * row[i];
      }
    }
    if (l == 0) break;
    // ReLU derivative of the hidden layer feeding this one.
    for (std::size_t i = 0; i < n_in; ++i)
      if (in[i] <= 0.0) prev[i] = 0.0;
    delta.swap(prev);
  }
}

std::vector<double> Mlp::widen_flat(std::span<const double> flat, int extra) const {
  if (flat.size() != params_.size()) throw std::invalid_argument("vector does not match the network's parameter shape");
  if (extra < 0) throw std::invalid_argument("cannot narrow the input layer");
  const auto n_in = static_cast<std::size_t>(sizes_[0]);
  const auto n_out = static_cast<std::size_t>(sizes_[1]);
  const auto wide = n_in + static_cast<std::size_t>(extra);
  std::vector<double> out;
  out.reserve(flat.size() + n_out * static_cast<std::size_t>(extra));
  for (std::size_t o = 0; o < n_out; ++o) {
    out.insert(out.end(), flat.begin() + static_cast<std::ptrdiff_t>(o * n_in),
               flat.begin() + static_cast<std::ptrdiff_t>((o + 1) * n_in));
    out.resize(out.size() + (wide - n_in), 0.0);
  }
  out.insert(out.end(), flat.begin() + static_cast<std::ptrdiff_t>(n_in * n_out), flat.end());
  return out;
}

void Mlp::widen_input(int extra) {
  auto widened = widen_flat(params_, extra);
  sizes_[0] += extra;
  layout();
  params_ = std::move(widened);
}

AdamOptimizer::AdamOptimizer(std::size_t parameter_count, double learning_rate, double beta1, double beta2,
                             double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon), m_(parameter_count, 0.0), v_(parameter_count, 0.0) {}

void AdamOptimizer::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size())
    throw std::invalid_argument("optimizer state does not match the parameter count");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

void soft_update(Mlp& target, const Mlp& online, double tau) {
  if (target.layer_sizes() != online.layer_sizes()) throw std::invalid_argument("soft update between differently shaped networks");
  auto t = target.parameters();
  auto o = online.parameters();
  if (tau == 1.0) {
    std::copy(o.begin(), o.end(), t.begin());
    return;
  }
  if (tau == 0.0) return;
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = (1.0 - tau) * t[i] + tau * o[i];
}

}  // namespace partadvisor
