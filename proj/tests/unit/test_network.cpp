#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "fedunlearn/network.hpp"
#include "fedunlearn/rng.hpp"

using namespace fedunlearn;

TEST_CASE("init_params is deterministic and bit-identical across calls") {
  NetworkSpec spec;
  spec.num_classes = 2;
  spec.layers = {DenseLayer{2, 2, true}};
  const ParamSet a = init_params(spec, 7);
  const ParamSet b = init_params(spec, 7);
  CHECK(bit_equal(a, b));
  CHECK(a.rng_seed == 7);
  const ParamSet c = init_params(spec, 8);
  CHECK_FALSE(bit_equal(a, c));
}

TEST_CASE("init_params zeroes biases and bounds weights by the fan-in rule") {
  NetworkSpec spec;
  spec.num_classes = 5;
  spec.layers = {DenseLayer{3, 5, true}};
  const ParamSet p = init_params(spec, 1);

  const auto* w = p.find("dense0.weight");
  REQUIRE(w != nullptr);
  CHECK(w->tensor.shape == std::vector<int64_t>{5, 3});
  CHECK(w->tensor.numel() == 15);
  const double bound = 1.0 / std::sqrt(3.0);
  for (double v : w->tensor.values) CHECK(std::fabs(v) <= bound);

  const auto* b = p.find("dense0.bias");
  REQUIRE(b != nullptr);
  for (double v : b->tensor.values) CHECK(v == 0.0);
}

TEST_CASE("init_params rejects incompatible layer dimensions") {
  NetworkSpec spec;
  spec.num_classes = 2;
  spec.layers = {DenseLayer{2, 3, true}, DenseLayer{4, 2, true}};
  CHECK_THROWS_AS(init_params(spec, 0), std::invalid_argument);

  NetworkSpec bad_out;
  bad_out.num_classes = 3;
  bad_out.layers = {DenseLayer{2, 2, true}};
  CHECK_THROWS_AS(init_params(bad_out, 0), std::invalid_argument);
}

TEST_CASE("forward with zero parameters yields zero logits") {
  NetworkSpec spec;
  spec.num_classes = 3;
  spec.layers = {DenseLayer{4, 3, true}};
  ParamSet p = zeros_like(init_params(spec, 0));
  const Tensor batch = Tensor::from_values({2, 4}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8});
  const Tensor logits = forward(spec, p, batch);
  CHECK(logits.shape == std::vector<int64_t>{2, 3});
  for (double v : logits.values) CHECK(v == 0.0);
}

TEST_CASE("identity dense layer passes the input through") {
  NetworkSpec spec;
  spec.num_classes = 2;
  spec.layers = {DenseLayer{2, 2, false}};
  ParamSet p = init_params(spec, 0);
  p.find("dense0.weight")->tensor = Tensor::from_values({2, 2}, {1.0, 0.0, 0.0, 1.0});
  const Tensor batch = Tensor::from_values({1, 2}, {0.25, -0.75});
  const Tensor out = forward(spec, p, batch);
  CHECK(out.values[0] == 0.25);
  CHECK(out.values[1] == -0.75);
}

TEST_CASE("forward matches a hand-computed 2-2-2 matrix product") {
  NetworkSpec spec;
  spec.num_classes = 2;
  spec.layers = {DenseLayer{2, 2, true}, ReluLayer{}, DenseLayer{2, 2, true}};
  ParamSet p = init_params(spec, 0);
  p.find("dense0.weight")->tensor = Tensor::from_values({2, 2}, {0.5, -1.0, 2.0, 0.25});
  p.find("dense0.bias")->tensor = Tensor::from_values({2}, {0.1, -0.2});
  p.find("dense1.weight")->tensor = Tensor::from_values({2, 2}, {1.0, -0.5, 0.75, 1.5});
  p.find("dense1.bias")->tensor = Tensor::from_values({2}, {0.0, 0.3});

  const Tensor batch = Tensor::from_values({1, 2}, {0.6, 0.4});
  // hidden pre-activation: (0.5*0.6 - 1.0*0.4 + 0.1, 2.0*0.6 + 0.25*0.4 - 0.2) = (0.0, 1.1)
  // relu: (0.0, 1.1)
  // logits: (1.0*0 - 0.5*1.1 + 0, 0.75*0 + 1.5*1.1 + 0.3) = (-0.55, 1.95)
  const Tensor out = forward(spec, p, batch);
  CHECK(out.values[0] == doctest::Approx(-0.55).epsilon(1e-12));
  CHECK(out.values[1] == doctest::Approx(1.95).epsilon(1e-12));
}

TEST_CASE("forward rejects shape mismatches") {
  NetworkSpec spec;
  spec.num_classes = 2;
  spec.layers = {DenseLayer{3, 2, true}};
  const ParamSet p = init_params(spec, 0);
  const Tensor bad = Tensor::from_values({1, 2}, {1.0, 2.0});
  CHECK_THROWS_AS(forward(spec, p, bad), std::invalid_argument);
}

TEST_CASE("flatten layers are width-preserving no-ops") {
  NetworkSpec spec;
  spec.num_classes = 2;
  spec.layers = {FlattenLayer{}, DenseLayer{2, 2, true}};
  const ParamSet p = init_params(spec, 3);
  const Tensor batch = Tensor::from_values({1, 2}, {0.5, 0.5});
  CHECK_NOTHROW(forward(spec, p, batch));
}

TEST_CASE("mix_seed decorrelates nearby indices") {
  CHECK(mix_seed(1, 0) != mix_seed(1, 1));
  CHECK(mix_seed(1, 0) != mix_seed(2, 0));
  CHECK(mix_seed(123, 45) == mix_seed(123, 45));
}
