#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "oracles.hpp"
#include "swann/link/crc32.hpp"
#include "swann/nn/mlp.hpp"
#include "swann/util/fast_math.hpp"
#include "swann/util/rng.hpp"

using namespace swann;

namespace {

nn::Mlp random_net(std::vector<uint16_t> sizes, nn::Activation out_act,
                   uint64_t seed, double weight_scale = 1.0) {
  Rng rng(seed);
  auto net = nn::Mlp::make(std::move(sizes), out_act, rng);
  for (auto& w : net.params)
    w = static_cast<float>(rng.uniform(-weight_scale, weight_scale));
  return net;
}

}  // namespace

TEST_CASE("fast tanh and exp track libm") {
  double worst_tanh = 0.0, worst_exp = 0.0;
  for (double x = -25.0; x <= 25.0; x += 0.0037) {
    worst_tanh = std::max(worst_tanh, std::fabs(fast_tanh(x) - std::tanh(x)));
    if (x >= -20.0 && x <= 20.0) {
      const double rel =
          std::fabs(fast_exp(x) - std::exp(x)) / std::exp(x);
      worst_exp = std::max(worst_exp, rel);
    }
  }
  CHECK(worst_tanh < 1e-11);
  CHECK(worst_exp < 1e-12);
  CHECK(fast_tanh(0.0) == 0.0);
  CHECK(fast_exp(-1000.0) == 0.0);
}

TEST_CASE("forward: zero weights give zero output") {
  Rng rng(1);
  auto net = nn::Mlp::make({4, 8, 2}, nn::Activation::Tanh, rng);
  std::fill(net.params.begin(), net.params.end(), 0.0f);
  const std::vector<double> in{0.3, -2.0, 5.0, 0.1};
  for (double v : nn::forward(net, in)) CHECK(v == 0.0);
}

TEST_CASE("forward: 1-1 net with zero weight returns tanh(bias)") {
  Rng rng(2);
  auto net = nn::Mlp::make({1, 1}, nn::Activation::Tanh, rng);
  net.params[0] = 0.0f;   // weight
  net.params[1] = 0.7f;   // bias
  const auto out = nn::forward(net, std::vector<double>{3.0});
  CHECK(out[0] ==
        doctest::Approx(std::tanh(static_cast<double>(net.params[1])))
            .epsilon(1e-9));
}

TEST_CASE("forward matches independent matrix oracle on 4-8-8-2") {
  auto net = random_net({4, 8, 8, 2}, nn::Activation::Tanh, 42);
  Rng rng(99);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> in(4);
    for (auto& v : in) v = rng.uniform(-2.0, 2.0);
    const auto got = nn::forward(net, in);
    const auto want = oracle::reference_forward(net, in);
    for (size_t i = 0; i < got.size(); ++i)
      worst = std::max(worst, std::fabs(got[i] - want[i]));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("forward rejects dimension mismatch") {
  auto net = random_net({4, 8, 2}, nn::Activation::Tanh, 5);
  CHECK_THROWS(nn::forward(net, std::vector<double>{1.0, 2.0}));
}

TEST_CASE("backward: zero upstream gradient gives zero parameter gradient") {
  auto net = random_net({3, 6, 2}, nn::Activation::Tanh, 7);
  nn::FwdCache cache;
  nn::forward(net, std::vector<double>{0.1, 0.2, 0.3}, cache);
  std::vector<double> grad(net.param_count(), 0.0);
  nn::backward(net, cache, std::vector<double>{0.0, 0.0}, {}, grad);
  for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("backward requires a forward cache") {
  auto net = random_net({2, 2}, nn::Activation::Tanh, 8);
  nn::FwdCache cache;
  std::vector<double> grad(net.param_count(), 0.0);
  CHECK_THROWS(nn::backward(net, cache, std::vector<double>{0.0, 0.0}, {}, grad));
}

TEST_CASE("backward: scalar net matches analytic tanh derivative") {
  Rng rng(3);
  auto net = nn::Mlp::make({1, 1}, nn::Activation::Tanh, rng);
  net.params[0] = 0.6f;
  net.params[1] = -0.2f;
  const double x = 1.3;
  nn::FwdCache cache;
  nn::forward(net, std::vector<double>{x}, cache);
  std::vector<double> grad(2, 0.0);
  nn::backward(net, cache, std::vector<double>{1.0}, {}, grad);
  const double y = std::tanh(static_cast<double>(net.params[0]) * x +
                             static_cast<double>(net.params[1]));
  CHECK(grad[0] == doctest::Approx(x * (1.0 - y * y)).epsilon(1e-9));
  CHECK(grad[1] == doctest::Approx(1.0 - y * y).epsilon(1e-9));
}

TEST_CASE("backward matches central finite differences on 3-16-16-4") {
  auto net = random_net({3, 16, 16, 4}, nn::Activation::Tanh, 11, 0.7);
  Rng rng(12);
  std::vector<double> in(3), c(4);
  for (auto& v : in) v = rng.uniform(-1.0, 1.0);
  for (auto& v : c) v = rng.uniform(-1.0, 1.0);

  nn::FwdCache cache;
  nn::forward(net, in, cache);
  std::vector<double> grad(net.param_count(), 0.0);
  nn::backward(net, cache, c, {}, grad);

  auto loss = [&net, &in, &c] {
    const auto y = nn::forward(net, in);
    double acc = 0.0;
    for (size_t i = 0; i < y.size(); ++i) acc += c[i] * y[i];
    return acc;
  };
  const auto fd = oracle::fd_gradient(net, loss, 1e-4);
  CHECK(oracle::max_rel_err(grad, fd) < 1e-3);
}

TEST_CASE("gradient sweep: 50 random nets and losses agree with FD") {
  Rng rng(123);
  double worst = 0.0;
  for (int n = 0; n < 50; ++n) {
    const uint16_t h = static_cast<uint16_t>(3 + rng.index(6));
    const int nin = static_cast<int>(2 + rng.index(4));
    const int nout = static_cast<int>(1 + rng.index(3));
    const auto act = rng.bernoulli(0.5) ? nn::Activation::Tanh
                                        : nn::Activation::Identity;
    auto net = random_net({static_cast<uint16_t>(nin), h, h,
                           static_cast<uint16_t>(nout)},
                          act, rng.raw(), 0.8);
    std::vector<double> in(nin), c(nout);
    for (auto& v : in) v = rng.uniform(-1.5, 1.5);
    for (auto& v : c) v = rng.uniform(-1.0, 1.0);

    nn::FwdCache cache;
    nn::forward(net, in, cache);
    std::vector<double> grad(net.param_count(), 0.0);
    nn::backward(net, cache, c, {}, grad);
    auto loss = [&net, &in, &c] {
      const auto y = nn::forward(net, in);
      double acc = 0.0;
      for (size_t i = 0; i < y.size(); ++i) acc += c[i] * y[i];
      return acc;
    };
    worst = std::max(worst, oracle::max_rel_err(grad, oracle::fd_gradient(net, loss)));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("backward accumulates input gradients and pre-activation terms") {
  auto net = random_net({3, 8, 2}, nn::Activation::Tanh, 21, 0.6);
  const std::vector<double> in{0.4, -0.2, 0.9};
  nn::FwdCache cache;
  nn::forward(net, in, cache);
  // loss = sum(y) + 0.5 * sum(z_last): dpre injects at the last affine output
  std::vector<double> grad(net.param_count(), 0.0);
  const std::vector<double> dout{1.0, 1.0};
  const std::vector<double> dpre{0.5, 0.5};
  nn::backward(net, cache, dout, dpre, grad);
  auto loss = [&] {
    nn::FwdCache c2;
    nn::forward(net, in, c2);
    double acc = 0.0;
    for (double v : c2.act.back()) acc += v;
    for (double v : c2.pre.back()) acc += 0.5 * v;
    return acc;
  };
  CHECK(oracle::max_rel_err(grad, oracle::fd_gradient(net, loss)) < 1e-3);
}

TEST_CASE("pre-activation output") {
  Rng rng(31);
  auto net = nn::Mlp::make({1, 1}, nn::Activation::Tanh, rng);
  SUBCASE("zero weights give zero vector") {
    net.params[0] = 0.0f;
    net.params[1] = 0.0f;
    CHECK(nn::pre_activation_output(net, std::vector<double>{5.0})[0] == 0.0);
  }
  SUBCASE("identity-like net returns affine output while forward squashes") {
    net.params[0] = 1.0f;
    net.params[1] = 0.0f;
    const std::vector<double> in{2.0};
    CHECK(nn::pre_activation_output(net, in)[0] == doctest::Approx(2.0));
    CHECK(nn::forward(net, in)[0] == doctest::Approx(std::tanh(2.0)).epsilon(1e-9));
  }
  SUBCASE("tanh of pre-activation equals forward output elementwise") {
    auto big = random_net({5, 12, 3}, nn::Activation::Tanh, 44);
    Rng r2(45);
    std::vector<double> in(5);
    for (auto& v : in) v = r2.uniform(-2.0, 2.0);
    const auto pre = nn::pre_activation_output(big, in);
    const auto out = nn::forward(big, in);
    for (size_t i = 0; i < out.size(); ++i)
      CHECK(out[i] == doctest::Approx(std::tanh(pre[i])).epsilon(1e-12));
  }
}

TEST_CASE("adam") {
  SUBCASE("zero gradient leaves parameters unchanged") {
    std::vector<float> p{0.5f, -0.25f};
    nn::AdamState st(2, 1e-3);
    const std::vector<double> g{0.0, 0.0};
    nn::adam_step(st, p, g);
    CHECK(p[0] == 0.5f);
    CHECK(p[1] == -0.25f);
    CHECK(st.step == 1);
  }
  SUBCASE("first step with unit gradient moves by ~lr") {
    std::vector<float> p{1.0f, 2.0f};
    nn::AdamState st(2, 1e-3);
    nn::adam_step(st, p, std::vector<double>{1.0, 1.0});
    // mhat = 1, vhat = 1 -> delta = lr / (1 + eps) ~ 9.99999990e-4
    CHECK(p[0] == doctest::Approx(1.0 - 9.99999990e-4).epsilon(1e-6));
    CHECK(p[1] == doctest::Approx(2.0 - 9.99999990e-4).epsilon(1e-6));
  }
  SUBCASE("two opposite-sign steps match a scalar reference") {
    std::vector<float> p{0.0f};
    nn::AdamState st(1, 1e-2);
    nn::adam_step(st, p, std::vector<double>{2.0});
    nn::adam_step(st, p, std::vector<double>{-2.0});
    // scalar recomputation of the two updates
    double m = 0.0, v = 0.0, x = 0.0;
    const double lr = 1e-2, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    double g = 2.0;
    for (int t = 1; t <= 2; ++t) {
      m = b1 * m + (1 - b1) * g;
      v = b2 * v + (1 - b2) * g * g;
      const double mh = m / (1 - std::pow(b1, t));
      const double vh = v / (1 - std::pow(b2, t));
      x = static_cast<float>(x - lr * mh / (std::sqrt(vh) + eps));
      g = -2.0;
    }
    CHECK(p[0] == doctest::Approx(x).epsilon(1e-12));
  }
  SUBCASE("length mismatch is a hard error") {
    std::vector<float> p{0.0f};
    nn::AdamState st(2, 1e-3);
    CHECK_THROWS(nn::adam_step(st, p, std::vector<double>{1.0, 1.0}));
  }
}

TEST_CASE("polyak update") {
  Rng rng(51);
  auto target = nn::Mlp::make({2, 3, 1}, nn::Activation::Tanh, rng);
  auto online = target;
  for (auto& w : target.params) w = 0.0f;
  for (auto& w : online.params) w = 2.0f;

  SUBCASE("rho = 1 keeps the target") {
    nn::polyak_update(target, online, 1.0);
    for (float w : target.params) CHECK(w == 0.0f);
  }
  SUBCASE("rho = 0 copies the online net") {
    nn::polyak_update(target, online, 0.0);
    for (float w : target.params) CHECK(w == 2.0f);
  }
  SUBCASE("rho = 0.5 averages") {
    nn::polyak_update(target, online, 0.5);
    for (float w : target.params) CHECK(w == 1.0f);
  }
  SUBCASE("architecture mismatch is a hard error") {
    auto other = nn::Mlp::make({2, 4, 1}, nn::Activation::Tanh, rng);
    CHECK_THROWS(nn::polyak_update(target, other, 0.5));
  }
}

TEST_CASE("serialization") {
  SUBCASE("round trip is bit-exact on random nets") {
    Rng rng(61);
    for (int trial = 0; trial < 10; ++trial) {
      auto net = random_net({static_cast<uint16_t>(2 + rng.index(5)),
                             static_cast<uint16_t>(1 + rng.index(16)),
                             static_cast<uint16_t>(1 + rng.index(4))},
                            rng.bernoulli(0.5) ? nn::Activation::Tanh
                                               : nn::Activation::Identity,
                            rng.raw());
      const auto bytes = nn::serialize(net);
      const auto back = nn::deserialize(bytes);
      REQUIRE(back.has_value());
      CHECK(back->layer_sizes == net.layer_sizes);
      CHECK(back->output_act == net.output_act);
      REQUIRE(back->params.size() == net.params.size());
      CHECK(std::memcmp(back->params.data(), net.params.data(),
                        4 * net.params.size()) == 0);
    }
  }
  SUBCASE("7-13-5 image length matches the format arithmetic") {
    auto net = random_net({7, 13, 5}, nn::Activation::Tanh, 62);
    const auto bytes = nn::serialize(net);
    // header: magic 4 + version 1 + count 1 + 3 sizes u16 + 2 tags
    const size_t header = 4 + 1 + 1 + 3 * 2 + 2;
    const size_t payload = 4 * (7 * 13 + 13 + 13 * 5 + 5);
    CHECK(bytes.size() == header + payload + 4);
  }
  SUBCASE("flipped payload byte with fixed crc changes the weights") {
    auto net = random_net({3, 4, 2}, nn::Activation::Tanh, 63);
    auto bytes = nn::serialize(net);
    bytes[bytes.size() - 8] ^= 0x40;  // inside the last float
    // recompute trailing crc so the image still decodes
    const uint32_t crc = swann::link::crc32(bytes.data(), bytes.size() - 4);
    for (int i = 0; i < 4; ++i)
      bytes[bytes.size() - 4 + i] = static_cast<uint8_t>(crc >> (8 * i));
    const auto back = nn::deserialize(bytes);
    REQUIRE(back.has_value());
    CHECK(std::memcmp(back->params.data(), net.params.data(),
                      4 * net.params.size()) != 0);
  }
  SUBCASE("corruption and truncation yield distinct decode errors") {
    auto net = random_net({3, 4, 2}, nn::Activation::Tanh, 64);
    auto bytes = nn::serialize(net);

    auto flipped = bytes;
    flipped[16] ^= 0x01;  // payload byte; header stays intact
    nn::DecodeError err;
    CHECK(!nn::deserialize(flipped, &err).has_value());
    CHECK(err.code == nn::DecodeCode::BadCrc);
    CHECK(err.offset == bytes.size() - 4);

    nn::DecodeError err2;
    CHECK(!nn::deserialize(
               std::span<const uint8_t>(bytes.data(), bytes.size() - 3), &err2)
               .has_value());
    CHECK(err2.code == nn::DecodeCode::Truncated);

    auto badmagic = bytes;
    badmagic[0] = 'X';
    nn::DecodeError err3;
    CHECK(!nn::deserialize(badmagic, &err3).has_value());
    CHECK(err3.code == nn::DecodeCode::BadMagic);
    CHECK(err3.offset == 0);
  }
}

TEST_CASE("identical seeds give identical weights") {
  Rng a(777), b(777);
  const auto n1 = nn::Mlp::make({4, 32, 32, 2}, nn::Activation::Tanh, a, 1e-2);
  const auto n2 = nn::Mlp::make({4, 32, 32, 2}, nn::Activation::Tanh, b, 1e-2);
  CHECK(std::memcmp(n1.params.data(), n2.params.data(),
                    4 * n1.params.size()) == 0);
}
