#include "citcp/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "citcp/rng.hpp"

namespace citcp {

Mlp::Mlp(std::vector<int> layer_sizes, std::uint64_t seed) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp needs at least two layers");
  for (int s : sizes_)
    if (s < 1) throw std::invalid_argument("Mlp layer sizes must be positive");

  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    weight_offsets_.push_back(total);
    total += static_cast<std::size_t>(sizes_[l]) * static_cast<std::size_t>(sizes_[l + 1]);
    bias_offsets_.push_back(total);
    total += static_cast<std::size_t>(sizes_[l + 1]);
  }
  params_.resize(total);

  // Xavier-style init keeps tanh activations in their linear region.
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const double scale = std::sqrt(6.0 / (sizes_[l] + sizes_[l + 1]));
    const std::size_t nw =
        static_cast<std::size_t>(sizes_[l]) * static_cast<std::size_t>(sizes_[l + 1]);
    for (std::size_t i = 0; i < nw; ++i)
      params_[weight_offsets_[l] + i] = rng.uniform(-scale, scale);
    // biases start at zero
  }
}

const std::vector<double>& Mlp::forward(std::span<const double> x, Workspace& ws) const {
  if (static_cast<int>(x.size()) != input_size())
    throw std::invalid_argument("Mlp input width mismatch");
  ws.layers.resize(sizes_.size());
  ws.layers[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int nin = sizes_[l];
    const int nout = sizes_[l + 1];
    const double* w = params_.data() + weight_offsets_[l];
    const double* b = params_.data() + bias_offsets_[l];
    const std::vector<double>& in = ws.layers[l];
    std::vector<double>& out = ws.layers[l + 1];
    out.assign(static_cast<std::size_t>(nout), 0.0);
    for (int o = 0; o < nout; ++o) {
      double acc = b[o];
      const double* wrow = w + static_cast<std::size_t>(o) * nin;
      for (int i = 0; i < nin; ++i) acc += wrow[i] * in[i];
      out[o] = (l + 2 < sizes_.size()) ? std::tanh(acc) : acc;
    }
  }
  return ws.layers.back();
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
  Workspace ws;
  return forward(x, ws);
}

void Mlp::backward(const Workspace& ws, std::span<const double> dloss_doutput,
                   std::vector<double>& grad) const {
  if (grad.size() != params_.size()) grad.assign(params_.size(), 0.0);
  if (ws.layers.size() != sizes_.size())
    throw std::invalid_argument("Mlp workspace does not match a forward pass");
  std::vector<double> delta(dloss_doutput.begin(), dloss_doutput.end());
  for (std::size_t l = sizes_.size() - 1; l-- > 0;) {
    const int nin = sizes_[l];
    const int nout = sizes_[l + 1];
    const double* w = params_.data() + weight_offsets_[l];
    double* gw = grad.data() + weight_offsets_[l];
    double* gb = grad.data() + bias_offsets_[l];
    const std::vector<double>& in = ws.layers[l];
    for (int o = 0; o < nout; ++o) {
      const double d = delta[static_cast<std::size_t>(o)];
      gb[o] += d;
      double* gwrow = gw + static_cast<std::size_t>(o) * nin;
      for (int i = 0; i < nin; ++i) gwrow[i] += d * in[i];
    }
    if (l == 0) break;
    std::vector<double> prev(static_cast<std::size_t>(nin), 0.0);
    for (int i = 0; i < nin; ++i) {
      double acc = 0.0;
      for (int o = 0; o < nout; ++o)
        acc += delta[static_cast<std::size_t>(o)] * w[static_cast<std::size_t>(o) * nin + i];
      // layers[l] holds tanh outputs; d tanh = 1 - y^2.
      acc *= 1.0 - in[i] * in[i];
      prev[static_cast<std::size_t>(i)] = acc;
    }
    delta = std::move(prev);
  }
}

void Mlp::apply_delta(std::span<const double> delta, double scale) {
  if (delta.size() != params_.size())
    throw std::invalid_argument("Mlp delta size mismatch");
  for (std::size_t i = 0; i < params_.size(); ++i) params_[i] += scale * delta[i];
}

}  // namespace citcp
