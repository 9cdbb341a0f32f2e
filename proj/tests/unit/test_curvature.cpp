#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "fedunlearn/curvature.hpp"
#include "fedunlearn/rng.hpp"
#include "fedunlearn/train.hpp"
#include "test_oracles.hpp"

using namespace fedunlearn;

namespace {

Dataset two_feature_data(int n, uint64_t seed) { return synth_blobs(2, n / 2, 2, 0.15, seed); }

NetworkSpec linear_spec(int64_t in, int classes) {
  NetworkSpec spec;
  spec.num_classes = classes;
  spec.layers = {DenseLayer{in, classes, true}};
  return spec;
}

}  // namespace

TEST_CASE("linear softmax GGN diagonal matches the closed form (p - p^2) x^2") {
  const NetworkSpec spec = linear_spec(3, 4);
  const ParamSet p = init_params(spec, 11);

  Dataset one;
  one.features = Tensor::from_values({1, 3}, {0.3, -0.0 + 0.7, 0.2});
  one.labels = {2};
  one.class_count = 4;
  one.source_tag = "hand";

  const HessianDiag h = hessian_diag(spec, p, one);
  const Tensor probs = softmax_rows(forward(spec, p, one.features));

  const auto& hw = h.find("dense0.weight")->tensor;
  const auto& hb = h.find("dense0.bias")->tensor;
  for (int64_t c = 0; c < 4; ++c) {
    const double pc = probs.values[static_cast<size_t>(c)];
    const double q = pc - pc * pc;
    for (int64_t j = 0; j < 3; ++j) {
      const double x = one.features.values[static_cast<size_t>(j)];
      CHECK(hw.at(c, j) == doctest::Approx(q * x * x).epsilon(1e-12));
    }
    CHECK(hb.values[static_cast<size_t>(c)] == doctest::Approx(q).epsilon(1e-12));
  }
}

TEST_CASE("GGN diagonal is additive over disjoint unions, 2-way and 3-way") {
  const NetworkSpec spec = linear_spec(2, 2);
  const ParamSet p = init_params(spec, 3);
  const Dataset ds = two_feature_data(60, 7);
  const auto idx = all_indices(static_cast<size_t>(ds.size()));
  const HessianDiag full = hessian_diag(spec, p, ds);

  std::mt19937_64 rng(5);
  for (int parts : {2, 3}) {
    const auto perm = random_permutation(rng, idx.size());
    std::vector<std::vector<size_t>> split(static_cast<size_t>(parts));
    for (size_t i = 0; i < perm.size(); ++i) split[i % static_cast<size_t>(parts)].push_back(perm[i]);

    HessianDiag stitched = zeros_diag(p);
    for (const auto& sub : split) {
      const HessianDiag hs = hessian_diag(spec, p, ds, sub);
      const double w = static_cast<double>(sub.size()) / static_cast<double>(idx.size());
      for (size_t b = 0; b < stitched.blocks.size(); ++b) {
        for (size_t i = 0; i < stitched.blocks[b].tensor.values.size(); ++i) {
          stitched.blocks[b].tensor.values[i] += w * hs.blocks[b].tensor.values[i];
        }
      }
    }
    for (size_t b = 0; b < full.blocks.size(); ++b) {
      for (size_t i = 0; i < full.blocks[b].tensor.values.size(); ++i) {
        const double ref = full.blocks[b].tensor.values[i];
        const double got = stitched.blocks[b].tensor.values[i];
        CHECK(std::fabs(ref - got) <= 1e-12 * std::max(std::fabs(ref), 1e-30));
      }
    }
  }
}

TEST_CASE("GGN mode matches the explicit per-sample Jacobian oracle on a 2-4-2 net") {
  NetworkSpec spec;
  spec.num_classes = 2;
  spec.layers = {DenseLayer{2, 4, true}, ReluLayer{}, DenseLayer{4, 2, true}};
  const ParamSet p = init_params(spec, 77);

  std::mt19937_64 rng(6);
  std::vector<double> values(16);
  for (auto& v : values) v = uniform_range(rng, 0.0, 1.0);
  const Tensor batch = Tensor::from_values({8, 2}, std::move(values));

  Dataset ds;
  ds.features = batch;
  ds.labels = {0, 1, 0, 1, 0, 1, 0, 1};
  ds.class_count = 2;
  const HessianDiag got = hessian_diag(spec, p, ds);
  const ParamSet want = oracles::explicit_ggn_diag(spec, p, batch);

  double max_rel = 0.0;
  for (size_t b = 0; b < want.blocks.size(); ++b) {
    for (size_t i = 0; i < want.blocks[b].tensor.values.size(); ++i) {
      const double ref = want.blocks[b].tensor.values[i];
      const double err = std::fabs(ref - got.blocks[b].tensor.values[i]);
      max_rel = std::max(max_rel, err / std::max(std::fabs(ref), 1e-12));
    }
  }
  CHECK(max_rel < 1e-8);
}

TEST_CASE("GGN values are nonnegative across random nets") {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 5; ++rep) {
    NetworkSpec spec;
    spec.num_classes = 3;
    const int64_t hidden = 2 + static_cast<int64_t>(uniform_below(rng, 6));
    spec.layers = {DenseLayer{4, hidden, true}, ReluLayer{}, DenseLayer{hidden, 3, true}};
    const ParamSet p = init_params(spec, rng());
    const Dataset ds = synth_blobs(3, 10, 4, 0.3, rng());
    const HessianDiag h = hessian_diag(spec, p, ds);
    for (const auto& b : h.blocks) {
      for (double v : b.tensor.values) CHECK(v >= 0.0);
    }
  }
}

TEST_CASE("FD-exact mode agrees with GGN on a linear softmax model") {
  // Without hidden nonlinearities the exact Hessian equals the GGN.
  const NetworkSpec spec = linear_spec(2, 3);
  const ParamSet p = init_params(spec, 15);
  const Dataset ds = synth_blobs(3, 8, 2, 0.2, 9);

  const HessianDiag ggn = hessian_diag(spec, p, ds, CurvatureMode::Ggn);
  const HessianDiag fd = hessian_diag(spec, p, ds, CurvatureMode::FdExact);
  CHECK(fd.mode == CurvatureMode::FdExact);
  for (size_t b = 0; b < ggn.blocks.size(); ++b) {
    for (size_t i = 0; i < ggn.blocks[b].tensor.values.size(); ++i) {
      CHECK(fd.blocks[b].tensor.values[i] ==
            doctest::Approx(ggn.blocks[b].tensor.values[i]).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("non-finite parameters are reported with the offending block name") {
  const NetworkSpec spec = linear_spec(2, 2);
  ParamSet p = init_params(spec, 1);
  p.find("dense0.weight")->tensor.values[0] = std::numeric_limits<double>::infinity();
  const Dataset ds = two_feature_data(4, 2);
  try {
    (void)hessian_diag(spec, p, ds);
    FAIL("expected a numeric error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("dense0.weight") != std::string::npos);
  }
}

TEST_CASE("hessian_diag rejects an empty sample set") {
  const NetworkSpec spec = linear_spec(2, 2);
  const ParamSet p = init_params(spec, 1);
  const Dataset ds = two_feature_data(4, 2);
  const std::vector<size_t> empty;
  CHECK_THROWS_AS(hessian_diag(spec, p, ds, empty), std::invalid_argument);
}
