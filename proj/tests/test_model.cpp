#include "doctest.h"

#include <cmath>

#include "llp/bagging.hpp"
#include "llp/model.hpp"
#include "support/oracles.hpp"

using namespace llp;
using llp::testing::central_difference;
using llp::testing::relative_error;

namespace {

FeatureMatrix random_bag(Rng& rng, Eigen::Index n, Eigen::Index d) {
  std::normal_distribution<double> g(0.0, 1.0);
  FeatureMatrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = g(rng);
  return x;
}

ModelParams random_model(Architecture arch, Rng& rng, Eigen::Index d, Eigen::Index h, int c) {
  auto p = init_params(arch, d, h, c, RngSeed{rng()});
  // Non-zero biases so the check does not sit on a symmetric point.
  std::normal_distribution<double> g(0.0, 0.5);
  for (Eigen::Index i = 0; i < p.b_out.size(); ++i) p.b_out[i] = g(rng);
  for (Eigen::Index i = 0; i < p.b_hidden.size(); ++i) p.b_hidden[i] = g(rng);
  return p;
}

double min_gap(const SimplexVector& a, const SimplexVector& b) {
  double m = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::min(m, std::abs(a[i] - b[i]));
  return m;
}

// Relative error of backward() against central differences of bag_loss()
// over every parameter.
double gradient_error(const ModelParams& params, const FeatureMatrix& x, const SimplexVector& rho, LossKind kind,
                      const LossParams& lp) {
  const auto analytic = flatten(backward(params, x, rho, kind, lp).gradient);
  ModelParams probe = params;
  const auto numeric = central_difference(
      [&](const Eigen::VectorXd& theta) {
        unflatten(theta, probe);
        return bag_loss(probe, x, rho, kind, lp).total;
      },
      flatten(params));
  return relative_error(analytic, numeric);
}

}  // namespace

TEST_CASE("forward produces a distribution") {
  auto p = init_params(Architecture::Linear, 3, 0, 4, RngSeed{1});
  p.w_out.setZero();
  const std::vector<double> x{1.0, -2.0, 0.5};
  const auto t = forward(p, x);
  for (double v : t.distribution) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));

  auto q = init_params(Architecture::Linear, 2, 0, 2, RngSeed{1});
  q.w_out.setZero();
  q.b_out << 10.0, -10.0;
  const auto extreme = forward(q, std::vector<double>{3.0, 4.0});
  CHECK(extreme.distribution[1] == doctest::Approx(2.0611536181902035814e-9).epsilon(1e-12));
  CHECK(std::abs(extreme.distribution[0] + extreme.distribution[1] - 1.0) <= 1e-12);

  CHECK_THROWS_AS(forward(p, std::vector<double>{1.0, 2.0}), Error);
  CHECK_THROWS_AS(forward(p, std::vector<double>{1.0, std::nan(""), 2.0}), Error);
}

TEST_CASE("softmax is stabilised but value preserving") {
  Rng rng(2);
  std::normal_distribution<double> g(0.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    Vector logits(5);
    for (auto& v : logits) v = g(rng);
    CHECK((softmax(logits) - llp::testing::naive_softmax(logits)).cwiseAbs().maxCoeff() <= 1e-12);
  }
  Vector huge(2);
  huge << 1000.0, 999.0;
  CHECK(softmax(huge).allFinite());
}

TEST_CASE("mlp1 forward is a linear head over the hidden embedding") {
  Rng rng(4);
  const auto mlp = random_model(Architecture::Mlp1, rng, 3, 5, 3);
  ModelParams head;
  head.architecture = Architecture::Linear;
  head.w_out = mlp.w_out;
  head.b_out = mlp.b_out;
  const std::vector<double> x{0.2, -1.0, 0.7};
  const auto t = forward(mlp, x);
  const auto via_head = forward(head, t.embedding);
  for (std::size_t c = 0; c < 3; ++c) CHECK(t.distribution[c] == via_head.distribution[c]);
}

TEST_CASE("aggregate_predictions is the arithmetic mean") {
  auto trace_for = [&](double p0) {
    ForwardTrace t{Vector(), Vector(), Vector(), make_simplex({p0, 1.0 - p0})};
    return t;
  };
  std::vector<ForwardTrace> one{trace_for(0.3)};
  CHECK(aggregate_predictions(one) == one.front().distribution);
  std::vector<ForwardTrace> two{trace_for(1.0), trace_for(0.0)};
  CHECK(aggregate_predictions(two) == make_simplex({0.5, 0.5}));
  std::vector<ForwardTrace> three{trace_for(0.9), trace_for(0.5), trace_for(0.1)};
  const auto mean = aggregate_predictions(three);
  CHECK(mean[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(mean[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(aggregate_predictions(std::vector<ForwardTrace>{}), Error);
}

TEST_CASE("forward_bag agrees with per-instance forward") {
  Rng rng(6);
  const auto p = random_model(Architecture::Mlp1, rng, 4, 6, 3);
  const auto x = random_bag(rng, 5, 4);
  const auto fw = forward_bag(p, x);
  std::vector<ForwardTrace> traces;
  for (Eigen::Index i = 0; i < x.rows(); ++i) traces.push_back(forward(p, Vector(x.row(i).transpose())));
  const auto mean = aggregate_predictions(traces);
  for (std::size_t c = 0; c < 3; ++c) CHECK(fw.rho_tilde[c] == doctest::Approx(mean[c]).epsilon(1e-14));
}

TEST_CASE("predict takes the argmax with lowest-index ties") {
  auto p = init_params(Architecture::Linear, 1, 0, 2, RngSeed{1});
  p.w_out.setZero();
  p.b_out << 0.0, std::log(4.0);  // distribution (0.2, 0.8)
  CHECK(predict(p, std::vector<double>{1.0}) == 1);
  p.b_out << 0.0, 0.0;
  CHECK(predict(p, std::vector<double>{1.0}) == 0);

  Rng rng(3);
  auto q = random_model(Architecture::Linear, rng, 3, 0, 4);
  const auto x = random_bag(rng, 50, 3);
  const auto before = predict_all(q, x);
  q.w_out *= 3.7;
  q.b_out *= 3.7;
  CHECK(predict_all(q, x) == before);
}

TEST_CASE("backward at an exact proportion match has no proportion gradient") {
  auto p = init_params(Architecture::Linear, 2, 0, 2, RngSeed{1});
  p.w_out.setZero();
  FeatureMatrix x(2, 2);
  x << 1.0, 2.0, -1.0, 0.5;
  const auto r = backward(p, x, make_simplex({0.5, 0.5}), LossKind::TvStar, LossParams{2.0, 0.0});
  CHECK(r.loss.total == 0.0);
  CHECK(flatten(r.gradient).isZero(0.0));
}

TEST_CASE("linear backward does not depend on lambda") {
  Rng rng(5);
  const auto p = random_model(Architecture::Linear, rng, 3, 0, 2);
  const auto x = random_bag(rng, 6, 3);
  const auto rho = make_simplex({1.0 / 3.0, 2.0 / 3.0});
  const auto g0 = backward(p, x, rho, LossKind::Combined, LossParams{2.0, 0.0});
  const auto g1 = backward(p, x, rho, LossKind::Combined, LossParams{2.0, 1.0});
  CHECK(flatten(g0.gradient) == flatten(g1.gradient));
  CHECK(g1.loss.total > g0.loss.total);
}

TEST_CASE("mlp1 backward matches finite differences over every parameter") {
  Rng rng(7);
  const auto p = random_model(Architecture::Mlp1, rng, 4, 5, 3);
  const auto x = random_bag(rng, 8, 4);
  const auto rho = make_simplex({0.125, 0.5, 0.375});
  CHECK(gradient_error(p, x, rho, LossKind::Combined, LossParams{2.0, 0.5}) <= 1e-4);
  CHECK(gradient_error(p, x, rho, LossKind::Dllp, LossParams{1.0, 0.0}) <= 1e-4);
}

TEST_CASE("end-to-end gradient sweep across architectures, alpha and lambda") {
  Rng rng(99);
  int checked = 0;
  for (auto arch : {Architecture::Linear, Architecture::Mlp1}) {
    for (double alpha : {0.5, 1.0, 2.0, 3.5}) {
      for (double lambda : {0.0, 0.5}) {
        int done = 0;
        while (done < 7) {
          const int c = 2 + done % 2;
          const auto p = random_model(arch, rng, 3, 4, c);
          const auto x = random_bag(rng, 2 + done, 3);
          std::vector<int> labels(static_cast<std::size_t>(x.rows()));
          for (auto& y : labels) y = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(c)));
          const auto rho = bag_proportions(labels, c);
          if (min_gap(rho, forward_bag(p, x).rho_tilde) < 1e-3) continue;
          CHECK(gradient_error(p, x, rho, LossKind::Combined, LossParams{alpha, lambda}) <= 1e-4);
          ++done;
          ++checked;
        }
      }
    }
  }
  CHECK(checked >= 50);
}

TEST_CASE("a small gradient step never increases the bag loss") {
  Rng rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    const auto arch = trial % 2 ? Architecture::Mlp1 : Architecture::Linear;
    auto p = random_model(arch, rng, 3, 4, 2);
    const auto x = random_bag(rng, 6, 3);
    const auto rho = make_simplex({0.5, 0.5});
    const LossParams lp{trial % 3 == 0 ? 1.0 : 2.0, 0.5};
    const auto r = backward(p, x, rho, LossKind::Combined, lp);
    Vector theta = flatten(p) - 1e-4 * flatten(r.gradient);
    unflatten(theta, p);
    CHECK(bag_loss(p, x, rho, LossKind::Combined, lp).total <= r.loss.total + 1e-9);
  }
}

TEST_CASE("flatten and unflatten are inverse") {
  Rng rng(1);
  auto p = random_model(Architecture::Mlp1, rng, 3, 4, 2);
  ModelParams q = p.zeros_like();
  unflatten(flatten(p), q);
  CHECK(q == p);
  CHECK(flatten(p).size() == 4 * 3 + 4 + 2 * 4 + 2);
}

TEST_CASE("params validate their shapes") {
  auto p = init_params(Architecture::Mlp1, 3, 4, 2, RngSeed{1});
  CHECK_NOTHROW(p.validate());
  p.b_hidden.resize(2);
  CHECK_THROWS_AS(p.validate(), Error);
  auto q = init_params(Architecture::Linear, 3, 0, 2, RngSeed{1});
  q.w_out(0, 0) = std::nan("");
  CHECK_THROWS_AS(q.validate(), Error);
  // Initialization bounds.
  const auto r = init_params(Architecture::Mlp1, 9, 16, 3, RngSeed{8});
  CHECK(r.w_hidden.cwiseAbs().maxCoeff() <= 1.0 / 3.0);
  CHECK(r.w_out.cwiseAbs().maxCoeff() <= 0.25);
  CHECK(r.b_hidden.isZero(0.0));
  CHECK(r.b_out.isZero(0.0));
}
