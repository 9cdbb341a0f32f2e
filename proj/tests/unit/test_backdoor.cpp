#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "fedunlearn/backdoor.hpp"

using namespace fedunlearn;

namespace {

Dataset zero_images(int n, int64_t side, int classes = 10) {
  Dataset ds;
  ds.features = Tensor({n, side * side}, 0.0);
  ds.labels.assign(static_cast<size_t>(n), 0);
  for (int i = 0; i < n; ++i) ds.labels[static_cast<size_t>(i)] = i % classes;
  ds.class_count = classes;
  ds.source_tag = "zeros";
  return ds;
}

}  // namespace

TEST_CASE("apply_trigger stamps exactly trigger_size^2 pixels per image") {
  const Dataset ds = zero_images(3, 28);
  BackdoorSpec bd;  // 3x3, top-right
  const Tensor triggered = apply_trigger(ds.features, bd);
  for (int n = 0; n < 3; ++n) {
    size_t ones = 0;
    for (int64_t i = 0; i < 784; ++i) {
      const double v = triggered.values[static_cast<size_t>(n * 784 + i)];
      if (v == 1.0) ++ones;
    }
    CHECK(ones == 9);
    // the patch sits in rows 0..2, cols 25..27
    for (int64_t r = 0; r < 3; ++r) {
      for (int64_t c = 25; c < 28; ++c) {
        CHECK(triggered.values[static_cast<size_t>(n * 784 + r * 28 + c)] == 1.0);
      }
    }
  }
}

TEST_CASE("apply_trigger corners land where they should") {
  const Dataset ds = zero_images(1, 5);
  BackdoorSpec bd;
  bd.trigger_size = 2;

  bd.corner = TriggerCorner::TopLeft;
  CHECK(apply_trigger(ds.features, bd).values[0] == 1.0);
  bd.corner = TriggerCorner::BottomLeft;
  CHECK(apply_trigger(ds.features, bd).values[4 * 5 + 0] == 1.0);
  bd.corner = TriggerCorner::BottomRight;
  CHECK(apply_trigger(ds.features, bd).values[4 * 5 + 4] == 1.0);
}

TEST_CASE("poison rewrites the poisoned client only") {
  Dataset ds = zero_images(12, 4);
  Partition part;
  part.client_indices = {{0, 1, 2, 3}, {4, 5, 6, 7}, {8, 9, 10, 11}};
  part.forget_flags.assign(12, 0);

  BackdoorSpec bd;
  bd.trigger_size = 2;
  bd.target_label = 9;
  bd.poisoned_client = 1;
  const Dataset poisoned = poison(ds, part, bd);

  for (size_t i : part.client_indices[1]) {
    CHECK(poisoned.labels[i] == 9);
    CHECK(poisoned.features.values[i * 16 + 2] == 1.0);  // top-right of a 4x4 image
  }
  for (size_t i : {0u, 1u, 2u, 3u, 8u, 9u, 10u, 11u}) {
    CHECK(poisoned.labels[i] == ds.labels[i]);
    for (int64_t j = 0; j < 16; ++j) {
      CHECK(poisoned.features.values[i * 16 + static_cast<size_t>(j)] ==
            ds.features.values[i * 16 + static_cast<size_t>(j)]);
    }
  }
}

TEST_CASE("poison is idempotent") {
  const Dataset ds = synth_blobs(10, 6, 16, 0.2, 5);
  Partition part = partition_random(ds, 3, 7);
  BackdoorSpec bd;
  bd.trigger_size = 2;
  const Dataset once = poison(ds, part, bd);
  const Dataset twice = poison(once, part, bd);
  CHECK(once.features.values == twice.features.values);
  CHECK(once.labels == twice.labels);
}

TEST_CASE("apply_trigger leaves labels untouched by construction") {
  const Dataset ds = zero_images(4, 4);
  BackdoorSpec bd;
  bd.trigger_size = 1;
  const Tensor t1 = apply_trigger(ds.features, bd);
  const Tensor t2 = apply_trigger(t1, bd);
  CHECK(t1.values == t2.values);  // idempotent pixel edit
}

TEST_CASE("backdoor operations validate their inputs") {
  const Dataset nonsquare = synth_blobs(2, 4, 15, 0.1, 1);
  Partition part = partition_random(nonsquare, 2, 3);
  BackdoorSpec bd;
  CHECK_THROWS_AS(poison(nonsquare, part, bd), std::invalid_argument);

  const Dataset small = zero_images(4, 2);
  Partition p2;
  p2.client_indices = {{0, 1}, {2, 3}};
  p2.forget_flags.assign(4, 0);
  BackdoorSpec too_big;
  too_big.trigger_size = 3;
  CHECK_THROWS_AS(poison(small, p2, too_big), std::invalid_argument);

  BackdoorSpec bad_client;
  bad_client.trigger_size = 1;
  bad_client.poisoned_client = 5;
  CHECK_THROWS_AS(poison(small, p2, bad_client), std::invalid_argument);

  BackdoorSpec bad_fraction;
  bad_fraction.trigger_size = 1;
  bad_fraction.poison_fraction = 0.0;
  CHECK_THROWS_AS(poison(small, p2, bad_fraction), std::invalid_argument);
}

TEST_CASE("poison_fraction poisons a seeded subset of the client") {
  const Dataset ds = zero_images(40, 4, 4);
  Partition part;
  part.client_indices = {{}, {}};
  for (size_t i = 0; i < 20; ++i) part.client_indices[0].push_back(i);
  for (size_t i = 20; i < 40; ++i) part.client_indices[1].push_back(i);
  part.forget_flags.assign(40, 0);

  BackdoorSpec bd;
  bd.trigger_size = 2;
  bd.target_label = 3;
  bd.poison_fraction = 0.5;
  const Dataset poisoned = poison(ds, part, bd, 11);
  size_t flipped = 0;
  for (size_t i = 0; i < 20; ++i) flipped += poisoned.labels[i] == 3 && ds.labels[i] != 3 ? 1 : 0;
  size_t kept = 0;
  for (size_t i = 0; i < 20; ++i) kept += poisoned.labels[i] == ds.labels[i] ? 1 : 0;
  CHECK(flipped >= 7);  // 10 flips expected, a few indices may already carry label 3
  CHECK(kept >= 7);
  const Dataset again = poison(ds, part, bd, 11);
  CHECK(again.labels == poisoned.labels);
}
