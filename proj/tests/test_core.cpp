#include "doctest.h"

#include <set>

#include "llp/core.hpp"

using namespace llp;

namespace {

Errc error_code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected llp::Error");
  return Errc::InvalidArguments;
}

}  // namespace

TEST_CASE("make_simplex accepts points on the simplex") {
  CHECK(make_simplex({0.5, 0.5}).size() == 2);
  const auto vertex = make_simplex({1.0, 0.0});
  CHECK(vertex[0] == 1.0);
  CHECK(vertex[1] == 0.0);
}

TEST_CASE("make_simplex rejects instead of renormalizing") {
  CHECK(error_code_of([] { make_simplex({0.6, 0.5}); }) == Errc::SumNotOne);
  CHECK(error_code_of([] { make_simplex({1.2, -0.2}); }) == Errc::NegativeComponent);
  CHECK(error_code_of([] { make_simplex({1.0}); }) == Errc::TooFewClasses);
  CHECK(error_code_of([] { make_simplex({std::nan(""), 1.0}); }) == Errc::NonFiniteInput);
  // Within tolerance is fine, just outside is not.
  CHECK_NOTHROW(make_simplex({0.5 + 5e-10, 0.5}));
  CHECK(error_code_of([] { make_simplex({0.5 + 2e-9, 0.5}); }) == Errc::SumNotOne);
}

TEST_CASE("simplex round trip is lossless and re-validates") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto raw = sample_uniform_simplex(rng, 2 + static_cast<std::size_t>(trial % 6));
    const auto s = make_simplex(raw);
    const std::vector<double> back(s.begin(), s.end());
    CHECK(back == raw);
    CHECK(is_simplex(s.values()));
  }
}

TEST_CASE("LabeledDataset validates labels and shapes") {
  FeatureMatrix x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  CHECK_NOTHROW(LabeledDataset(x, {0, 1, 1}, 2));
  CHECK(error_code_of([&] { LabeledDataset(x, {0, 2, 1}, 2); }) == Errc::LabelOutOfRange);
  CHECK(error_code_of([&] { LabeledDataset(x, {0, 1}, 2); }) == Errc::LengthMismatch);
  CHECK(error_code_of([&] { LabeledDataset(x, {0, 1, 0}, 1); }) == Errc::TooFewClasses);

  const LabeledDataset data(x, {0, 1, 1}, 2);
  const std::vector<std::size_t> pick{2, 0};
  const auto sub = data.subset(pick);
  CHECK(sub.size() == 2);
  CHECK(sub.labels() == std::vector<int>{1, 0});
  CHECK(sub.features()(0, 1) == 6.0);
}

TEST_CASE("bag consistency is checked against an integer recount") {
  FeatureMatrix x = FeatureMatrix::Zero(4, 1);
  const LabeledDataset data(x, {0, 1, 1, 1}, 2);
  CHECK(bag_is_consistent(data, Bag{{0, 1, 2, 3}, make_simplex({0.25, 0.75})}));
  CHECK_FALSE(bag_is_consistent(data, Bag{{0, 1, 2, 3}, make_simplex({0.5, 0.5})}));
  CHECK_FALSE(bag_is_consistent(data, Bag{{}, make_simplex({0.5, 0.5})}));
}

TEST_CASE("seed derivation is deterministic and separates streams") {
  const RngSeed s{42};
  CHECK(derive_seed(s, 3) == derive_seed(s, 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t e = 0; e < 1000; ++e) seen.insert(derive_seed(s, e).value);
  CHECK(seen.size() == 1000);
}

TEST_CASE("uniform_index covers the range evenly") {
  Rng rng(5);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) ++hist[uniform_index(rng, 7)];
  for (int h : hist) CHECK(std::abs(h - 10000) < 500);
}
