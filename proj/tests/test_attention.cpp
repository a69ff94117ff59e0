#include "doctest.h"
#include "miccan/attention.hpp"
#include "support.hpp"

using namespace miccan;
using namespace testing;

namespace {

FeatureMapStack random_maps(Rng& rng, std::size_t c, std::size_t h, std::size_t w) {
  FeatureMapStack f(c, h, w);
  for (double& v : f.values) v = rng.normal();
  return f;
}

struct GateParams {
  std::vector<double> w1, b1, w2, b2;
  GateParams(std::size_t c, std::size_t r) : w1(c / r * c), b1(c / r), w2(c * (c / r)), b2(c) {}
  GateWeights view() const { return {w1, b1, w2, b2}; }
};

}  // namespace

TEST_CASE("squeeze is the per-channel mean") {
  FeatureMapStack f(2, 3, 3);
  for (std::size_t k = 0; k < 9; ++k) {
    f.values[k] = 1.0;
    f.values[9 + k] = 3.0;
  }
  CHECK(channel_squeeze(f) == std::vector<double>{1.0, 3.0});

  FeatureMapStack spike(1, 4, 4);
  spike(0, 1, 2) = 1.0;
  CHECK(channel_squeeze(spike)[0] == doctest::Approx(1.0 / 16.0));

  Rng rng(1);
  const FeatureMapStack a = random_maps(rng, 3, 8, 8), b = random_maps(rng, 3, 8, 8);
  FeatureMapStack s = a;
  s += b;
  const auto za = channel_squeeze(a), zb = channel_squeeze(b), zs = channel_squeeze(s);
  for (std::size_t c = 0; c < 3; ++c) CHECK(zs[c] == doctest::Approx(za[c] + zb[c]).epsilon(1e-12));
}

TEST_CASE("zero gate parameters halve the features exactly") {
  Rng rng(2);
  const FeatureMapStack f = random_maps(rng, 8, 5, 5);
  const GateParams p(8, 4);
  const FeatureMapStack out = channel_gate(f, 4, p.view());
  for (std::size_t k = 0; k < f.values.size(); ++k) CHECK(out.values[k] == 0.5 * f.values[k]);
}

TEST_CASE("gates lie strictly inside (0, 1) and never amplify") {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const FeatureMapStack f = random_maps(rng, 8, 4, 4);
    GateParams p(8, 2);
    for (auto* v : {&p.w1, &p.b1, &p.w2, &p.b2})
      for (double& x : *v) x = rng.normal();
    GateTape tape;
    const FeatureMapStack out = channel_gate(f, 2, p.view(), &tape);
    for (double s : tape.gate) {
      CHECK(s > 0.0);
      CHECK(s < 1.0);
    }
    for (std::size_t c = 0; c < 8; ++c) {
      double in_max = 0.0, out_max = 0.0;
      for (double v : f.channel(c)) in_max = std::max(in_max, std::abs(v));
      for (double v : out.channel(c)) out_max = std::max(out_max, std::abs(v));
      CHECK(out_max <= in_max);
    }
  }
}

TEST_CASE("forced gates") {
  Rng rng(4);
  const FeatureMapStack f = random_maps(rng, 4, 3, 3);
  GateParams p(4, 2);
  for (double& x : p.w1) x = rng.normal();
  CHECK(channel_gate(f, 2, p.view(), nullptr, 1.0) == f);
  const FeatureMapStack half = channel_gate(f, 2, p.view(), nullptr, 0.5);
  for (std::size_t k = 0; k < f.values.size(); ++k) CHECK(half.values[k] == 0.5 * f.values[k]);
}

TEST_CASE("gate gradients match finite differences") {
  Rng rng(5);
  FeatureMapStack f = random_maps(rng, 8, 6, 6);
  GateParams p(8, 4);
  for (auto* v : {&p.w1, &p.b1, &p.w2, &p.b2})
    for (double& x : *v) x = rng.normal();
  const FeatureMapStack w = random_maps(rng, 8, 6, 6);
  auto loss = [&] {
    const FeatureMapStack out = channel_gate(f, 4, p.view());
    double acc = 0.0;
    for (std::size_t k = 0; k < out.values.size(); ++k) acc += w.values[k] * out.values[k];
    return acc;
  };

  GateTape tape;
  channel_gate(f, 4, p.view(), &tape);
  GateParams g(8, 4);
  const FeatureMapStack gf = channel_gate_backward(f, p.view(), tape, w, {g.w1, g.b1, g.w2, g.b2});

  for (auto [param, grad] : {std::pair{&p.w1, &g.w1}, {&p.b1, &g.b1}, {&p.w2, &g.w2}, {&p.b2, &g.b2}}) {
    const auto num = numeric_gradient(*param, loss);
    for (std::size_t k = 0; k < num.size(); ++k) CHECK(rel_err((*grad)[k], num[k], 1e-7) <= 1e-4);
  }
  const auto num_f = numeric_gradient(f.values, loss);
  for (std::size_t k = 0; k < num_f.size(); ++k) CHECK(rel_err(gf.values[k], num_f[k], 1e-7) <= 1e-4);
}

TEST_CASE("gate parameter count and dimension checks") {
  CHECK(gate_parameter_count(32, 8) == 32 * 4 + 4 + 4 * 32 + 32);
  Rng rng(6);
  const FeatureMapStack f = random_maps(rng, 6, 2, 2);
  const GateParams p(6, 3);
  CHECK_THROWS_AS(channel_gate(f, 4, p.view()), InvalidConfig);
  std::vector<double> short_w1(3);
  CHECK_THROWS_AS(channel_gate(f, 3, GateWeights{short_w1, p.b1, p.w2, p.b2}), InvalidConfig);
}
