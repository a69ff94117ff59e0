#include "doctest.h"
#include "miccan/losses.hpp"
#include "support.hpp"

using namespace miccan;
using namespace testing;

TEST_CASE("l1 and l2 basics") {
  Rng rng(1);
  const ComplexImage a = random_image(rng, 6, 6), b = random_image(rng, 6, 6);
  CHECK(l1_loss(a, a) == 0.0);
  CHECK(l2_loss(a, a) == 0.0);
  CHECK(l1_loss(a, b) == l1_loss(b, a));
  CHECK(l1_loss(a, b) > 0.0);

  ComplexImage x(4, 4), xs(4, 4);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) x.real()[i * 4 + j] = 0.5;
  CHECK(l1_loss(x, xs) == doctest::Approx(2.0));
  CHECK(l2_loss(x, xs) == doctest::Approx(1.0));
  CHECK_THROWS_AS(l1_loss(x, ComplexImage(4, 5)), InvalidInput);
}

TEST_CASE("perceptual loss") {
  Rng rng(2);
  const ConvPyramidExtractor ext;
  const ComplexImage a = random_image(rng, 16, 16);
  CHECK(perceptual_loss(a, a, ext, 4) == 0.0);
  for (int t = 0; t < 20; ++t) {
    const ComplexImage x = random_image(rng, 16, 16), y = random_image(rng, 16, 16);
    CHECK(perceptual_loss(x, y, ext, 4) > 0.0);
    CHECK(perceptual_loss(x, y, ext, 1) > 0.0);
  }
  // Identity extractor collapses to the squared distance of magnitudes.
  const IdentityExtractor id;
  const ComplexImage x = random_image(rng, 8, 8), y = random_image(rng, 8, 8);
  double expect = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = std::hypot(x.real()[k], x.imag()[k]) - std::hypot(y.real()[k], y.imag()[k]);
    expect += d * d;
  }
  CHECK(perceptual_loss(x, y, id, 1) == doctest::Approx(expect).epsilon(1e-12));
  CHECK_THROWS_AS(perceptual_loss(random_image(rng, 10, 10), random_image(rng, 10, 10), ext, 4), InvalidInput);
  CHECK_THROWS(perceptual_loss(x, y, ext, 5));
}

TEST_CASE("extractor is deterministic and layer shapes follow the pyramid") {
  const ConvPyramidExtractor a, b;
  CHECK(a.parameters() == b.parameters());
  CHECK(!(ConvPyramidExtractor(1).parameters() == a.parameters()));
  RealImage img(16, 16);
  Rng rng(3);
  for (double& v : img.values) v = rng.uniform();
  const auto f = a.extract(img, 4);
  REQUIRE(f.size() == 4);
  CHECK(f[0].channels == 8);
  CHECK(f[0].height == 16);
  CHECK(f[1].channels == 16);
  CHECK(f[1].height == 8);
  CHECK(f[2].channels == 16);
  CHECK(f[3].height == 4);
  CHECK(f == b.extract(img, 4));
  CHECK(ConvPyramidExtractor::from_parameters(a.parameters()).extract(img, 4) == f);
  CHECK(make_extractor("identity")->id() == "identity");
  CHECK_THROWS(make_extractor("vgg19"));
}

TEST_CASE("combined loss") {
  Rng rng(4);
  const ConvPyramidExtractor ext;
  const ComplexImage x = random_image(rng, 8, 8), xs = random_image(rng, 8, 8);
  LossConfig cfg;
  CHECK(cfg.lambda_1 == 10.0);
  CHECK(cfg.lambda_p == 0.5);
  CHECK(combined_loss(x, xs, cfg, ext) ==
        doctest::Approx(10.0 * l1_loss(x, xs) + 0.5 * perceptual_loss(x, xs, ext, 4)).epsilon(1e-12));
  cfg.lambda_p = 0.0;
  CHECK(combined_loss(x, xs, cfg, ext) == 10.0 * l1_loss(x, xs));
  LossConfig twice;
  twice.lambda_1 = 20.0;
  twice.lambda_p = 1.0;
  CHECK(combined_loss(x, xs, twice, ext) == doctest::Approx(2.0 * combined_loss(x, xs, LossConfig{}, ext)));
  CHECK(combined_loss(x, xs, LossConfig{}, ext) == combined_loss(x, xs, LossConfig{}, ext));
  LossConfig bad;
  bad.lambda_1 = bad.lambda_p = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);
  bad.lambda_1 = -1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);
}

TEST_CASE("loss gradients match finite differences") {
  Rng rng(5);
  const ConvPyramidExtractor ext;
  ComplexImage x = random_image(rng, 8, 8);
  const ComplexImage xs = random_image(rng, 8, 8);
  const LossConfig cfg;
  using Fn = std::function<LossValue()>;
  const std::vector<std::pair<const char*, Fn>> cases = {
      {"l1", [&] { return l1_loss_grad(x, xs); }},
      {"l2", [&] { return l2_loss_grad(x, xs); }},
      {"perceptual", [&] { return perceptual_loss_grad(x, xs, ext, 4); }},
      {"combined", [&] { return combined_loss_grad(x, xs, cfg, ext); }},
  };
  for (const auto& [name, fn] : cases) {
    CAPTURE(name);
    const LossValue lv = fn();
    auto f = [&] { return fn().value; };
    const auto nr = numeric_gradient(x.real(), f), ni = numeric_gradient(x.imag(), f);
    for (std::size_t k = 0; k < x.size(); ++k) {
      CHECK(rel_err(lv.grad.real()[k], nr[k], 1e-6) <= 1e-4);
      CHECK(rel_err(lv.grad.imag()[k], ni[k], 1e-6) <= 1e-4);
    }
  }
  CHECK(training_loss(LossPreset::L2, x, xs, cfg, ext).value == l2_loss(x, xs));
  CHECK(training_loss(LossPreset::COMBINED, x, xs, cfg, ext).value == combined_loss(x, xs, cfg, ext));
}
