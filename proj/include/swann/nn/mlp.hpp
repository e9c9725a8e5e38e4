#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swann/util/rng.hpp"

namespace swann::nn {

enum class Activation : uint8_t { Tanh = 0, Identity = 1 };

// Dense feedforward net. Parameters live in a single flat float32 vector,
// layer-major: for each layer the row-major weight matrix (rows = output
// units), then the bias vector. All arithmetic runs in double; float32 is
// the storage and wire format.
struct Mlp {
  std::vector<uint16_t> layer_sizes;  // input, hidden..., output
  Activation output_act = Activation::Tanh;
  std::vector<float> params;

  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  int layer_count() const { return static_cast<int>(layer_sizes.size()) - 1; }

  static size_t param_count(const std::vector<uint16_t>& sizes);
  size_t param_count() const { return param_count(layer_sizes); }

  // Xavier-uniform weights, zero biases. `final_scale` shrinks the last
  // layer (policy nets use 1e-2 to avoid initial actuation spikes).
  static Mlp make(std::vector<uint16_t> sizes, Activation output_act, Rng& rng,
                  double final_scale = 1.0);

  bool same_shape(const Mlp& other) const {
    return layer_sizes == other.layer_sizes && output_act == other.output_act;
  }
};

// Per-layer affine outputs and activations from one forward pass.
// act[0] is the input, act[l+1] the output of layer l; pre[l] is layer l's
// affine output before its activation.
struct FwdCache {
  std::vector<std::vector<double>> act;
  std::vector<std::vector<double>> pre;
  bool valid = false;
};

void forward(const Mlp& net, std::span<const double> input, FwdCache& cache);
std::vector<double> forward(const Mlp& net, std::span<const double> input);

// Last layer's affine output before the output activation.
std::vector<double> pre_activation_output(const Mlp& net,
                                          std::span<const double> input);

// Backprop through `cache`. `dout` is dL/d(output); `dpre_out` (optional,
// may be empty) is an additional dL/d(last pre-activation), for penalties
// applied before the output activation. Parameter gradients are
// accumulated (+=) into `dparams` (size param_count). If `dinput` is
// non-empty (size input), dL/d(input) is accumulated into it.
void backward(const Mlp& net, const FwdCache& cache,
              std::span<const double> dout, std::span<const double> dpre_out,
              std::span<double> dparams, std::span<double> dinput = {});

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double lr = 1e-4;

  explicit AdamState(size_t n, double lr_ = 1e-4)
      : m(n, 0.0), v(n, 0.0), lr(lr_) {}
};

void adam_step(AdamState& state, std::vector<float>& params,
               std::span<const double> grads);

// target <- rho*target + (1-rho)*online, elementwise
void polyak_update(Mlp& target, const Mlp& online, double rho);

// Wire format ("SWNN"): magic | version u8 | layer count u8 |
// layer sizes u16 each | activation tag u8 per layer boundary |
// float32 params | CRC-32 of all preceding bytes. Little-endian throughout.
std::vector<uint8_t> serialize(const Mlp& net);

enum class DecodeCode : uint8_t { Ok, BadMagic, BadHeader, Truncated, BadCrc };

struct DecodeError {
  DecodeCode code = DecodeCode::Ok;
  size_t offset = 0;
  std::string message;
};

std::optional<Mlp> deserialize(std::span<const uint8_t> bytes,
                               DecodeError* err = nullptr);

}  // namespace swann::nn
