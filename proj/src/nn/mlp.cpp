#include "swann/nn/mlp.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "swann/link/crc32.hpp"
#include "swann/util/fast_math.hpp"

namespace swann::nn {

size_t Mlp::param_count(const std::vector<uint16_t>& sizes) {
  size_t n = 0;
  for (size_t l = 0; l + 1 < sizes.size(); ++l)
    n += static_cast<size_t>(sizes[l]) * sizes[l + 1] + sizes[l + 1];
  return n;
}

Mlp Mlp::make(std::vector<uint16_t> sizes, Activation output_act, Rng& rng,
              double final_scale) {
  if (sizes.size() < 2) throw std::invalid_argument("Mlp: need >= 2 layers");
  for (auto s : sizes)
    if (s == 0) throw std::invalid_argument("Mlp: zero layer size");
  Mlp net;
  net.layer_sizes = std::move(sizes);
  net.output_act = output_act;
  net.params.resize(net.param_count());
  size_t off = 0;
  const int layers = net.layer_count();
  for (int l = 0; l < layers; ++l) {
    const int nin = net.layer_sizes[l];
    const int nout = net.layer_sizes[l + 1];
    double limit = std::sqrt(6.0 / (nin + nout));
    if (l == layers - 1) limit *= final_scale;
    for (int i = 0; i < nin * nout; ++i)
      net.params[off++] = static_cast<float>(rng.uniform(-limit, limit));
    off += nout;  // biases stay zero
  }
  return net;
}

namespace {

void apply_activation(Activation a, const std::vector<double>& pre,
                      std::vector<double>& out) {
  out.resize(pre.size());
  if (a == Activation::Tanh) {
    for (size_t i = 0; i < pre.size(); ++i) out[i] = fast_tanh(pre[i]);
  } else {
    out = pre;
  }
}

// y = W x + b for one layer; W row-major at params[off]
void affine(const float* w, int nin, int nout, const double* x, double* y) {
  const float* bias = w + static_cast<size_t>(nin) * nout;
  for (int j = 0; j < nout; ++j) {
    const float* row = w + static_cast<size_t>(j) * nin;
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    int i = 0;
    for (; i + 4 <= nin; i += 4) {
      a0 += static_cast<double>(row[i]) * x[i];
      a1 += static_cast<double>(row[i + 1]) * x[i + 1];
      a2 += static_cast<double>(row[i + 2]) * x[i + 2];
      a3 += static_cast<double>(row[i + 3]) * x[i + 3];
    }
    for (; i < nin; ++i) a0 += static_cast<double>(row[i]) * x[i];
    y[j] = ((a0 + a1) + (a2 + a3)) + bias[j];
  }
}

}  // namespace

void forward(const Mlp& net, std::span<const double> input, FwdCache& cache) {
  if (static_cast<int>(input.size()) != net.input_size())
    throw std::invalid_argument("forward: input size mismatch");
  const int layers = net.layer_count();
  cache.act.resize(layers + 1);
  cache.pre.resize(layers);
  cache.act[0].assign(input.begin(), input.end());
  size_t off = 0;
  for (int l = 0; l < layers; ++l) {
    const int nin = net.layer_sizes[l];
    const int nout = net.layer_sizes[l + 1];
    cache.pre[l].resize(nout);
    affine(net.params.data() + off, nin, nout, cache.act[l].data(),
           cache.pre[l].data());
    const Activation a =
        (l == layers - 1) ? net.output_act : Activation::Tanh;
    apply_activation(a, cache.pre[l], cache.act[l + 1]);
    off += static_cast<size_t>(nin) * nout + nout;
  }
  cache.valid = true;
}

std::vector<double> forward(const Mlp& net, std::span<const double> input) {
  FwdCache cache;
  forward(net, input, cache);
  return cache.act.back();
}

std::vector<double> pre_activation_output(const Mlp& net,
                                          std::span<const double> input) {
  FwdCache cache;
  forward(net, input, cache);
  return cache.pre.back();
}

void backward(const Mlp& net, const FwdCache& cache,
              std::span<const double> dout, std::span<const double> dpre_out,
              std::span<double> dparams, std::span<double> dinput) {
  if (!cache.valid) throw std::invalid_argument("backward: no forward cache");
  const bool want_params = !dparams.empty();
  if (want_params && dparams.size() != net.param_count())
    throw std::invalid_argument("backward: dparams size mismatch");
  if (static_cast<int>(dout.size()) != net.output_size())
    throw std::invalid_argument("backward: dout size mismatch");

  const int layers = net.layer_count();
  // layer parameter offsets
  std::vector<size_t> offs(layers);
  size_t off = 0;
  for (int l = 0; l < layers; ++l) {
    offs[l] = off;
    off += static_cast<size_t>(net.layer_sizes[l]) * net.layer_sizes[l + 1] +
           net.layer_sizes[l + 1];
  }

  std::vector<double> delta(dout.begin(), dout.end());
  std::vector<double> next;
  for (int l = layers - 1; l >= 0; --l) {
    const int nin = net.layer_sizes[l];
    const int nout = net.layer_sizes[l + 1];
    const Activation a =
        (l == layers - 1) ? net.output_act : Activation::Tanh;
    // d(activation): tanh' = 1 - y^2
    if (a == Activation::Tanh) {
      const auto& y = cache.act[l + 1];
      for (int j = 0; j < nout; ++j) delta[j] *= 1.0 - y[j] * y[j];
    }
    if (l == layers - 1 && !dpre_out.empty()) {
      if (static_cast<int>(dpre_out.size()) != nout)
        throw std::invalid_argument("backward: dpre_out size mismatch");
      for (int j = 0; j < nout; ++j) delta[j] += dpre_out[j];
    }
    const float* w = net.params.data() + offs[l];
    const auto& x = cache.act[l];
    if (want_params) {
      double* dw = dparams.data() + offs[l];
      for (int j = 0; j < nout; ++j) {
        const double dj = delta[j];
        double* dwrow = dw + static_cast<size_t>(j) * nin;
        for (int i = 0; i < nin; ++i) dwrow[i] += dj * x[i];
        dw[static_cast<size_t>(nin) * nout + j] += dj;
      }
    }
    // input grad for next layer down
    if (l > 0 || !dinput.empty()) {
      next.assign(nin, 0.0);
      for (int j = 0; j < nout; ++j) {
        const double dj = delta[j];
        const float* row = w + static_cast<size_t>(j) * nin;
        for (int i = 0; i < nin; ++i)
          next[i] += static_cast<double>(row[i]) * dj;
      }
      if (l == 0) {
        for (int i = 0; i < nin; ++i) dinput[i] += next[i];
        return;
      }
      delta.swap(next);
    }
  }
}

void adam_step(AdamState& state, std::vector<float>& params,
               std::span<const double> grads) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam_step: length mismatch");
  state.step += 1;
  const double b1 = state.beta1, b2 = state.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] = static_cast<float>(
        static_cast<double>(params[i]) -
        state.lr * mhat / (std::sqrt(vhat) + state.eps));
  }
}

void polyak_update(Mlp& target, const Mlp& online, double rho) {
  if (!target.same_shape(online))
    throw std::invalid_argument("polyak_update: architecture mismatch");
  for (size_t i = 0; i < target.params.size(); ++i) {
    target.params[i] = static_cast<float>(
        rho * static_cast<double>(target.params[i]) +
        (1.0 - rho) * static_cast<double>(online.params[i]));
  }
}

namespace {

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

bool fail(DecodeError* err, DecodeCode code, size_t offset,
          const std::string& msg) {
  if (err) *err = {code, offset, msg};
  return false;
}

}  // namespace

std::vector<uint8_t> serialize(const Mlp& net) {
  std::vector<uint8_t> out;
  out.reserve(32 + 4 * net.params.size());
  out.push_back('S');
  out.push_back('W');
  out.push_back('N');
  out.push_back('N');
  out.push_back(1);  // format version
  out.push_back(static_cast<uint8_t>(net.layer_sizes.size()));
  for (auto s : net.layer_sizes) put_u16(out, s);
  for (int l = 0; l < net.layer_count(); ++l) {
    const Activation a =
        (l == net.layer_count() - 1) ? net.output_act : Activation::Tanh;
    out.push_back(static_cast<uint8_t>(a));
  }
  for (float f : net.params) {
    uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(out, bits);
  }
  put_u32(out, link::crc32(out.data(), out.size()));
  return out;
}

std::optional<Mlp> deserialize(std::span<const uint8_t> bytes,
                               DecodeError* err) {
  DecodeError scratch;
  if (!err) err = &scratch;
  *err = {};
  if (bytes.size() < 6) {
    fail(err, DecodeCode::Truncated, bytes.size(), "short header");
    return std::nullopt;
  }
  if (std::memcmp(bytes.data(), "SWNN", 4) != 0) {
    fail(err, DecodeCode::BadMagic, 0, "bad magic");
    return std::nullopt;
  }
  if (bytes[4] != 1) {
    fail(err, DecodeCode::BadHeader, 4, "unknown format version");
    return std::nullopt;
  }
  const size_t nlayers = bytes[5];
  if (nlayers < 2) {
    fail(err, DecodeCode::BadHeader, 5, "layer count < 2");
    return std::nullopt;
  }
  const size_t header_len = 6 + 2 * nlayers + (nlayers - 1);
  if (bytes.size() < header_len) {
    fail(err, DecodeCode::Truncated, bytes.size(), "truncated header");
    return std::nullopt;
  }
  Mlp net;
  net.layer_sizes.resize(nlayers);
  for (size_t i = 0; i < nlayers; ++i) {
    const size_t o = 6 + 2 * i;
    net.layer_sizes[i] =
        static_cast<uint16_t>(bytes[o] | (bytes[o + 1] << 8));
    if (net.layer_sizes[i] == 0) {
      fail(err, DecodeCode::BadHeader, o, "zero layer size");
      return std::nullopt;
    }
  }
  const size_t tags_off = 6 + 2 * nlayers;
  for (size_t l = 0; l + 1 < nlayers; ++l) {
    const uint8_t tag = bytes[tags_off + l];
    if (tag > 1) {
      fail(err, DecodeCode::BadHeader, tags_off + l, "bad activation tag");
      return std::nullopt;
    }
    const bool last = (l + 2 == nlayers);
    if (last) {
      net.output_act = static_cast<Activation>(tag);
    } else if (tag != static_cast<uint8_t>(Activation::Tanh)) {
      fail(err, DecodeCode::BadHeader, tags_off + l,
           "hidden activation must be tanh");
      return std::nullopt;
    }
  }
  const size_t nparams = Mlp::param_count(net.layer_sizes);
  const size_t total = header_len + 4 * nparams + 4;
  if (bytes.size() < total) {
    fail(err, DecodeCode::Truncated, bytes.size(), "truncated payload");
    return std::nullopt;
  }
  if (bytes.size() > total) {
    fail(err, DecodeCode::BadHeader, total, "trailing bytes");
    return std::nullopt;
  }
  const uint32_t want = link::crc32(bytes.data(), total - 4);
  uint32_t got = 0;
  for (int i = 0; i < 4; ++i)
    got |= static_cast<uint32_t>(bytes[total - 4 + i]) << (8 * i);
  if (want != got) {
    fail(err, DecodeCode::BadCrc, total - 4, "crc mismatch");
    return std::nullopt;
  }
  net.params.resize(nparams);
  for (size_t i = 0; i < nparams; ++i) {
    uint32_t bits = 0;
    const size_t o = header_len + 4 * i;
    for (int b = 0; b < 4; ++b)
      bits |= static_cast<uint32_t>(bytes[o + b]) << (8 * b);
    std::memcpy(&net.params[i], &bits, 4);
  }
  return net;
}

}  // namespace swann::nn
