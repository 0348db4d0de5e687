#include "doctest.h"

#include <cmath>
#include <sstream>

#include "llp/bagging.hpp"
#include "llp/io.hpp"
#include "llp/trainer.hpp"

using namespace llp;

namespace {

TrainConfig quick_config() {
  TrainConfig c;
  c.bag_size = 8;
  c.epochs = 5;
  c.learning_rate = 0.05;
  c.alpha = 1.0;
  c.loss_kind = LossKind::TvStar;
  c.seed = RngSeed{3};
  return c;
}

LabeledDataset empty_like(const LabeledDataset& d) { return LabeledDataset(FeatureMatrix(0, d.dim()), {}, d.num_classes()); }

}  // namespace

TEST_CASE("config validation") {
  auto c = quick_config();
  CHECK_NOTHROW(c.validate());
  c.alpha = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = quick_config();
  c.epochs = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = quick_config();
  c.learning_rate = -1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = quick_config();
  c.lambda = -0.5;
  CHECK_THROWS_AS(c.validate(), Error);

  c = quick_config();
  CHECK(c.effective_clip_norm() == 0.0);
  c.loss_kind = LossKind::Dllp;
  CHECK(c.effective_clip_norm() == 10.0);
  c.clip_norm = 3.0;
  CHECK(c.effective_clip_norm() == 3.0);
}

TEST_CASE("training on separable blobs drives the proportion loss down") {
  const auto data = gen_blobs(250, 2, 2, 8.0, RngSeed{1});
  auto c = quick_config();
  c.epochs = 30;
  c.learning_rate = 0.01;
  const auto run = train(data, empty_like(data), c);
  CHECK(run.history.epochs() == 30);
  CHECK_FALSE(run.history.has_validation());
  CHECK(run.history.train_loss.back() < 0.01);
  CHECK(run.history.train_loss.back() < run.history.train_loss.front());
  CHECK(evaluate_model(run.params, data).scores.f1 > 0.95);
}

TEST_CASE("a single global bag only fixes the global proportion") {
  // 3:1 class imbalance, one bag holding everything.
  auto a = gen_blobs(300, 2, 2, 1.0, RngSeed{2});
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.labels()[i] == 0 || i % 3 == 0) keep.push_back(i);
  const auto data = a.subset(keep);
  auto c = quick_config();
  c.bag_size = data.size();
  c.epochs = 300;
  c.learning_rate = 0.05;
  const auto run = train(data, empty_like(data), c);
  const auto proba = predict_proba(run.params, data.features());
  const Eigen::RowVectorXd mean = proba.colwise().mean();
  std::vector<int> labels = data.labels();
  const auto rho = bag_proportions(labels, 2);
  CHECK(std::abs(mean[0] - rho[0]) < 0.05);
  CHECK(std::abs(mean[1] - rho[1]) < 0.05);
}

TEST_CASE("training is deterministic per seed") {
  const auto data = gen_blobs(100, 3, 4, 2.0, RngSeed{5});
  const auto split = split_dataset(data, 0.7, 0.15, RngSeed{6});
  auto c = quick_config();
  c.architecture = Architecture::Mlp1;
  c.hidden = 6;
  c.loss_kind = LossKind::Combined;
  c.lambda = 0.5;
  const auto a = train(split.train, split.val, c);
  const auto b = train(split.train, split.val, c);
  CHECK(a.params == b.params);
  CHECK(a.history.train_loss == b.history.train_loss);
  CHECK(a.history.val_loss == b.history.val_loss);
  std::ostringstream ha, hb;
  write_history_csv(ha, a.history, false);
  write_history_csv(hb, b.history, false);
  CHECK(ha.str() == hb.str());
  c.seed = RngSeed{4};
  CHECK_FALSE(train(split.train, split.val, c).params == a.params);
}

TEST_CASE("tv_star per-bag losses stay within the absolute bound") {
  const auto data = gen_blobs(100, 3, 3, 1.0, RngSeed{7});
  for (double alpha : {1.0, 2.0, 3.5}) {
    auto c = quick_config();
    c.alpha = alpha;
    c.bag_size = 4;
    c.learning_rate = 0.5;
    c.optimizer = Optimizer::Sgd;
    const auto run = train(data, empty_like(data), c);
    for (double m : run.history.max_bag_loss) {
      CHECK(m >= 0.0);
      CHECK(m <= 2.0);
    }
  }
}

TEST_CASE("dllp and sgd paths run and record validation loss") {
  const auto data = gen_blobs(80, 2, 2, 3.0, RngSeed{8});
  const auto split = split_dataset(data, 0.6, 0.2, RngSeed{9});
  auto c = quick_config();
  c.loss_kind = LossKind::Dllp;
  c.optimizer = Optimizer::Sgd;
  const auto run = train(split.train, split.val, c);
  CHECK(run.history.has_validation());
  for (double v : run.history.val_loss) CHECK(std::isfinite(v));
}

TEST_CASE("validation_score averages train plus validation over the tail") {
  TrainHistory h;
  h.train_loss = {1.0, 0.5};
  h.val_loss = {0.8, 0.4};
  CHECK(validation_score(h, 2) == doctest::Approx(1.35));
  CHECK(validation_score(h, 1) == doctest::Approx(0.9));
  TrainHistory flat;
  flat.train_loss = {0.3, 0.3, 0.3, 0.3};
  flat.val_loss = {0.3, 0.3, 0.3, 0.3};
  CHECK(validation_score(flat, 3) == doctest::Approx(0.6));
  try {
    validation_score(h, 3);
    FAIL("expected KTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::KTooLarge);
  }
}

TEST_CASE("sweep emits one row per value and seed, independent of jobs") {
  const auto data = gen_blobs(60, 2, 2, 2.0, RngSeed{10});
  const auto split = split_dataset(data, 0.6, 0.2, RngSeed{11});
  auto c = quick_config();
  c.epochs = 3;
  const std::vector<double> values{0.33, 0.5, 1.0, 2.0, 3.5};
  const std::vector<std::uint64_t> seeds{1, 2};
  const auto serial = sweep(split.train, split.val, split.test, c, SweepAxis::Alpha, values, seeds, 1);
  const auto parallel = sweep(split.train, split.val, split.test, c, SweepAxis::Alpha, values, seeds, 4);
  REQUIRE(serial.size() == 10);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].value == values[i / 2]);
    CHECK(serial[i].seed == seeds[i % 2]);
    CHECK(serial[i].scores.f1 == parallel[i].scores.f1);
    for (double m : {serial[i].scores.precision, serial[i].scores.recall, serial[i].scores.f1}) {
      CHECK(m >= 0.0);
      CHECK(m <= 1.0);
    }
  }
}

TEST_CASE("lambda sweep on a linear model is flat") {
  const auto data = gen_blobs(60, 2, 2, 2.0, RngSeed{12});
  const auto split = split_dataset(data, 0.6, 0.2, RngSeed{13});
  auto c = quick_config();
  c.loss_kind = LossKind::Combined;
  c.epochs = 4;
  const auto rows = sweep(split.train, split.val, split.test, c, SweepAxis::Lambda, {0.0, 0.1, 1.0, 5.0}, {7});
  for (const auto& r : rows) {
    CHECK(r.scores.precision == rows.front().scores.precision);
    CHECK(r.scores.recall == rows.front().scores.recall);
    CHECK(r.scores.f1 == rows.front().scores.f1);
  }
}

TEST_CASE("sweep rejects bad axis values") {
  const auto data = gen_blobs(10, 2, 2, 2.0, RngSeed{1});
  CHECK_THROWS_AS(sweep(data, data, data, quick_config(), SweepAxis::BagSize, {2.5}, {1}), Error);
  CHECK_THROWS_AS(sweep(data, data, data, quick_config(), SweepAxis::Alpha, {}, {1}), Error);
  CHECK_THROWS_AS(sweep(data, data, data, quick_config(), SweepAxis::Alpha, {-1.0}, {1}), Error);
}

TEST_CASE("an exploding step size is reported as divergence") {
  const auto data = gen_blobs(50, 2, 2, 8.0, RngSeed{14});
  auto c = quick_config();
  c.optimizer = Optimizer::Sgd;
  c.learning_rate = 1e308;
  try {
    train(data, empty_like(data), c);
    FAIL("expected DivergedLoss");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DivergedLoss);
  }
}
