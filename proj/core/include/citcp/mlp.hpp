#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace citcp {

// Small fully connected net: tanh hidden layers, identity output. Parameters
// live in one flat vector so gradients, serialization, and finite-difference
// checks all share the same layout (per layer: weights row-major [out][in],
// then biases).
class Mlp {
 public:
  Mlp() = default;
  // layer_sizes includes input and output, e.g. {8, 10, 1}.
  Mlp(std::vector<int> layer_sizes, std::uint64_t seed);

  int input_size() const { return sizes_.empty() ? 0 : sizes_.front(); }
  int output_size() const { return sizes_.empty() ? 0 : sizes_.back(); }
  const std::vector<int>& layer_sizes() const { return sizes_; }

  std::vector<double> forward(std::span<const double> x) const;

  // Scratch activations reused across forward/backward pairs.
  struct Workspace {
    std::vector<std::vector<double>> layers;  // layers[0] = input copy
  };
  const std::vector<double>& forward(std::span<const double> x, Workspace& ws) const;

  // Accumulates d(loss)/d(params) into grad (same layout as params()) given
  // d(loss)/d(output) for the forward pass recorded in ws. Returns
  // d(loss)/d(input) only if requested.
  void backward(const Workspace& ws, std::span<const double> dloss_doutput,
                std::vector<double>& grad) const;

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  // params += scale * delta (delta in the params layout).
  void apply_delta(std::span<const double> delta, double scale);

 private:
  std::vector<int> sizes_;
  std::vector<double> params_;
  std::vector<std::size_t> weight_offsets_;  // per layer transition
  std::vector<std::size_t> bias_offsets_;
};

}  // namespace citcp
