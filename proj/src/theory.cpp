#include "llp/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "llp/bagging.hpp"
#include "llp/losses.hpp"
#include "llp/model.hpp"

namespace llp::theory {

namespace {

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<double> binary(double p) { return {p, 1.0 - p}; }

template <typename F>
Eigen::VectorXd central_difference(F&& f, Eigen::VectorXd x) {
  constexpr double h = 1e-6;
  Eigen::VectorXd grad(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

double min_abs_gap(std::span<const double> a, std::span<const double> b) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.size(); ++i) m = std::min(m, std::abs(a[i] - b[i]));
  return m;
}

Eigen::VectorXd as_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

PinskerReport pinsker_audit(std::size_t n_trials, std::size_t num_classes, RngSeed seed) {
  if (n_trials < 1) throw Error(Errc::InvalidArguments, "n_trials must be >= 1");
  if (num_classes < 2) throw Error(Errc::TooFewClasses, "need at least 2 classes");
  Rng rng(seed.value);
  PinskerReport report{n_trials, 0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < n_trials; ++i) {
    const auto p = sample_uniform_simplex(rng, num_classes);
    const auto q = sample_uniform_simplex(rng, num_classes);
    double l1 = 0.0;
    for (std::size_t c = 0; c < num_classes; ++c) l1 += std::abs(p[c] - q[c]);
    const double tv = 0.5 * l1;
    const double slack = kl_proportion_loss(p, q) - 2.0 * tv * tv;
    report.min_slack = std::min(report.min_slack, slack);
    if (slack < -1e-12) ++report.violations;
  }
  return report;
}

double kappa(double alpha) {
  if (!(alpha > 0.0)) throw Error(Errc::NonPositiveAlpha, "alpha must be > 0");
  return std::pow(2.0, 2.0 / alpha - 1.0);
}

double theorem_rhs(int vc_dim, std::size_t m, double delta, double alpha) {
  if (vc_dim < 1 || m <= static_cast<std::size_t>(vc_dim) || !(delta > 0.0 && delta < 1.0) || !(alpha > 0.0)) {
    throw Error(Errc::InvalidArguments, "theorem_rhs needs m > vc_dim >= 1, 0 < delta < 1, alpha > 0");
  }
  const auto v = static_cast<double>(vc_dim);
  const auto n = static_cast<double>(m);
  const double complexity = std::sqrt(8.0 * v * std::log(std::numbers::e * n / v) / n);
  const double confidence = std::sqrt(2.0 * std::log(4.0 / delta) / n);
  return kappa(alpha) * (complexity + confidence);
}

ThresholdHypothesis::ThresholdHypothesis(double threshold) : t(threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw Error(Errc::InvalidArguments, "threshold must lie in [0, 1]");
}

std::vector<ThresholdHypothesis> threshold_grid(std::size_t n) {
  if (n < 2) throw Error(Errc::InvalidArguments, "grid needs at least 2 thresholds");
  std::vector<ThresholdHypothesis> grid;
  grid.reserve(n);
  for (std::size_t i = 0; i < n; ++i) grid.emplace_back(static_cast<double>(i) / static_cast<double>(n - 1));
  return grid;
}

double sample_aggregate(const std::vector<double>& sorted_sample, double t) {
  if (sorted_sample.empty()) throw Error(Errc::InvalidArguments, "empty sample");
  const auto first = std::lower_bound(sorted_sample.begin(), sorted_sample.end(), t);
  return static_cast<double>(sorted_sample.end() - first) / static_cast<double>(sorted_sample.size());
}

BoundReport theorem_mc_audit(std::size_t m, double delta, double alpha, std::size_t n_hypotheses,
                             std::size_t n_trials, RngSeed seed) {
  if (n_trials < 1) throw Error(Errc::InvalidArguments, "n_trials must be >= 1");
  const double rhs = theorem_rhs(1, m, delta, alpha);
  const auto grid = threshold_grid(n_hypotheses);
  const ThresholdHypothesis target(0.5);
  const auto population_target = binary(target.population_aggregate());

  BoundReport report;
  report.trials = n_trials;
  report.rhs = rhs;
  report.per_trial.reserve(n_trials);

  std::vector<double> sample(m);
  double slack_total = 0.0;
  for (std::size_t trial = 0; trial < n_trials; ++trial) {
    Rng rng(derive_seed(seed, trial).value);
    for (auto& x : sample) x = uniform01(rng);
    std::sort(sample.begin(), sample.end());
    const auto sample_target = binary(sample_aggregate(sample, target.t));

    TrialRecord rec{std::numeric_limits<double>::infinity(), 0.0, false};
    for (const auto& f : grid) {
      const double pop = f.population_aggregate();
      const double emp = sample_aggregate(sample, f.t);
      const double lhs = tv_star_loss(binary(pop), population_target, alpha);
      const double bound = tv_star_loss(binary(emp), sample_target, alpha) + rhs;
      rec.min_slack = std::min(rec.min_slack, bound - lhs);
      rec.max_deviation = std::max(rec.max_deviation, std::abs(emp - pop));
    }
    rec.violated = rec.min_slack < 0.0;
    if (rec.violated) ++report.violations;
    slack_total += rec.min_slack;
    report.per_trial.push_back(rec);
  }
  report.mean_slack = slack_total / static_cast<double>(n_trials);
  return report;
}

LipschitzReport probe_pair(double alpha, const std::vector<double>& a, const std::vector<double>& b,
                           const std::vector<double>& delta) {
  std::vector<double> moved(a.size());
  for (std::size_t c = 0; c < a.size(); ++c) moved[c] = a[c] + delta[c];
  const double step = norm(delta);
  if (step == 0.0) throw Error(Errc::InvalidArguments, "perturbation must be non-zero");

  const double value_change = std::abs(tv_star_loss(moved, b, alpha) - tv_star_loss(a, b, alpha));
  // grad_a L(a, b) is the prediction-side gradient with the roles swapped.
  const auto g0 = tv_star_gradient(b, a, alpha);
  const auto g1 = tv_star_gradient(b, moved, alpha);
  std::vector<double> diff(g0.size());
  for (std::size_t c = 0; c < g0.size(); ++c) diff[c] = g1[c] - g0[c];
  return LipschitzReport{value_change / step, norm(diff) / step, 1};
}

LipschitzReport lipschitz_probe(double alpha, std::size_t n_pairs, std::size_t num_classes, RngSeed seed,
                                double step) {
  if (!(alpha > 0.0)) throw Error(Errc::NonPositiveAlpha, "alpha must be > 0");
  if (num_classes < 2) throw Error(Errc::TooFewClasses, "need at least 2 classes");
  if (!(step > 0.0)) throw Error(Errc::InvalidArguments, "step must be > 0");
  Rng rng(seed.value);
  std::normal_distribution<double> gauss(0.0, 1.0);
  LipschitzReport report;
  std::vector<double> delta(num_classes);
  while (report.pairs < n_pairs) {
    const auto a = sample_uniform_simplex(rng, num_classes);
    const auto b = sample_uniform_simplex(rng, num_classes);
    // Random direction in the zero-sum plane so a + delta stays on the simplex.
    double mean = 0.0;
    for (auto& d : delta) mean += (d = gauss(rng));
    mean /= static_cast<double>(num_classes);
    for (auto& d : delta) d -= mean;
    const double len = norm(delta);
    if (len == 0.0) continue;
    bool inside = true;
    for (std::size_t c = 0; c < num_classes; ++c) {
      delta[c] *= step / len;
      inside = inside && a[c] + delta[c] >= 0.0;
    }
    if (!inside) continue;
    const auto one = probe_pair(alpha, a, b, delta);
    report.max_value_slope = std::max(report.max_value_slope, one.max_value_slope);
    report.max_gradient_slope = std::max(report.max_gradient_slope, one.max_gradient_slope);
    ++report.pairs;
  }
  return report;
}

double binary_gradient_norm_bound(double alpha) { return std::numbers::sqrt2 * kappa(alpha); }

std::vector<double> kl_slope_sequence(const std::vector<double>& eps_values) {
  const std::vector<double> rho{0.5, 0.5};
  std::vector<double> slopes;
  slopes.reserve(eps_values.size());
  for (double eps : eps_values) {
    if (!(eps > 0.0 && eps < 0.5)) throw Error(Errc::InvalidArguments, "eps must lie in (0, 0.5)");
    const double h = eps * 1e-3;
    const std::vector<double> q{eps, 1.0 - eps};
    const std::vector<double> moved{eps + h, 1.0 - eps - h};
    const double change = std::abs(kl_proportion_loss(rho, moved) - kl_proportion_loss(rho, q));
    slopes.push_back(change / (std::numbers::sqrt2 * h));
  }
  return slopes;
}

GradientCheckReport gradient_check(const std::vector<double>& alphas, std::size_t per_alpha, RngSeed seed) {
  Rng rng(seed.value);
  std::normal_distribution<double> gauss(0.0, 1.0);
  GradientCheckReport report;
  for (double alpha : alphas) {
    if (!(alpha > 0.0)) throw Error(Errc::NonPositiveAlpha, "alpha must be > 0");

    for (std::size_t done = 0; done < per_alpha;) {
      const std::size_t c = 2 + uniform_index(rng, 4);
      const auto rho = sample_uniform_simplex(rng, c);
      const auto rho_tilde = sample_uniform_simplex(rng, c);
      if (min_abs_gap(rho, rho_tilde) < 1e-3) continue;
      const auto numeric = central_difference(
          [&](const Eigen::VectorXd& q) {
            return tv_star_loss(rho, std::span<const double>(q.data(), static_cast<std::size_t>(q.size())), alpha);
          },
          as_vector(rho_tilde));
      report.worst_loss_error =
          std::max(report.worst_loss_error, relative_error(as_vector(tv_star_gradient(rho, rho_tilde, alpha)), numeric));
      ++done;
    }

    for (std::size_t i = 0; i < per_alpha; ++i) {
      const Eigen::Index rows = 1 + static_cast<Eigen::Index>(uniform_index(rng, 6));
      const Eigen::Index cols = 1 + static_cast<Eigen::Index>(uniform_index(rng, 8));
      EmbeddingMatrix z(rows, cols);
      for (Eigen::Index k = 0; k < z.size(); ++k) z.data()[k] = gauss(rng);
      const EmbeddingMatrix analytic = ssc_gradient(z);
      const auto numeric = central_difference(
          [&](const Eigen::VectorXd& flat) { return ssc_loss(Eigen::Map<const EmbeddingMatrix>(flat.data(), rows, cols)); },
          Eigen::Map<const Eigen::VectorXd>(z.data(), z.size()));
      report.worst_loss_error = std::max(
          report.worst_loss_error,
          relative_error(Eigen::Map<const Eigen::VectorXd>(analytic.data(), analytic.size()), numeric));
    }

    for (std::size_t done = 0; done < per_alpha;) {
      const auto arch = done % 2 ? Architecture::Mlp1 : Architecture::Linear;
      const double lambda = (done / 2) % 2 ? 0.5 : 0.0;
      const int c = 2 + static_cast<int>(uniform_index(rng, 3));
      const Eigen::Index d = 2 + static_cast<Eigen::Index>(uniform_index(rng, 3));
      auto params = init_params(arch, d, 4, c, RngSeed{rng()});
      for (Eigen::Index k = 0; k < params.b_out.size(); ++k) params.b_out[k] = 0.5 * gauss(rng);
      for (Eigen::Index k = 0; k < params.b_hidden.size(); ++k) params.b_hidden[k] = 0.5 * gauss(rng);
      FeatureMatrix x(2 + static_cast<Eigen::Index>(uniform_index(rng, 6)), d);
      for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = gauss(rng);
      std::vector<int> labels(static_cast<std::size_t>(x.rows()));
      for (auto& y : labels) y = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(c)));
      const auto rho = bag_proportions(labels, c);
      if (min_abs_gap(rho.values(), forward_bag(params, x).rho_tilde.values()) < 1e-3) continue;
      const LossParams lp{alpha, lambda};
      const auto analytic = flatten(backward(params, x, rho, LossKind::Combined, lp).gradient);
      ModelParams probe = params;
      const auto numeric = central_difference(
          [&](const Eigen::VectorXd& theta) {
            unflatten(theta, probe);
            return bag_loss(probe, x, rho, LossKind::Combined, lp).total;
          },
          flatten(params));
      report.worst_end_to_end_error = std::max(report.worst_end_to_end_error, relative_error(analytic, numeric));
      ++done;
    }
    report.configurations += 3 * per_alpha;
  }
  return report;
}

}  // namespace llp::theory
