#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "llp/core.hpp"

namespace llp::theory {

struct PinskerReport {
  std::size_t trials = 0;
  std::size_t violations = 0;
  double min_slack = 0.0;  // min over trials of KL - 2 TV^2
};

/// Counts Dirichlet-uniform pairs with KL(p||q) < 2 TV(p, q)^2 - 1e-12.
PinskerReport pinsker_audit(std::size_t n_trials, std::size_t num_classes, RngSeed seed);

/// 2^(2/alpha - 1).
double kappa(double alpha);

/// kappa(alpha) * (sqrt(8 V ln(e m / V) / m) + sqrt(2 ln(4 / delta) / m)).
double theorem_rhs(int vc_dim, std::size_t m, double delta, double alpha);

/// x -> 1[x >= t] on [0, 1] under the uniform measure.
struct ThresholdHypothesis {
  double t = 0.5;

  explicit ThresholdHypothesis(double threshold);
  bool operator()(double x) const { return x >= t; }
  /// Population aggregate P(f(x) = 1) = 1 - t.
  double population_aggregate() const { return 1.0 - t; }
};

/// `n` thresholds evenly spaced on [0, 1], endpoints included.
std::vector<ThresholdHypothesis> threshold_grid(std::size_t n);

/// Fraction of the sorted sample with x >= t.
double sample_aggregate(const std::vector<double>& sorted_sample, double t);

struct TrialRecord {
  double min_slack = 0.0;      // min over grid of RHS - LHS
  double max_deviation = 0.0;  // max over grid of |sample aggregate - population aggregate|
  bool violated = false;
};

struct BoundReport {
  std::size_t trials = 0;
  std::size_t violations = 0;
  double mean_slack = 0.0;
  double rhs = 0.0;  // theorem_rhs with V = 1
  std::vector<TrialRecord> per_trial;

  double violation_fraction() const {
    return trials == 0 ? 0.0 : static_cast<double>(violations) / static_cast<double>(trials);
  }
};

/// Monte-Carlo check of the proportion generalization bound for the
/// threshold class (VC dimension 1) with target threshold 0.5.
BoundReport theorem_mc_audit(std::size_t m, double delta, double alpha, std::size_t n_hypotheses,
                             std::size_t n_trials, RngSeed seed);

struct LipschitzReport {
  double max_value_slope = 0.0;     // max |L(a', b) - L(a, b)| / |a' - a|
  double max_gradient_slope = 0.0;  // max |grad L(a', b) - grad L(a, b)| / |a' - a|
  std::size_t pairs = 0;
};

/// Probes the parametrized TV loss with random interior pairs and random
/// on-simplex perturbations of norm `step`.
LipschitzReport lipschitz_probe(double alpha, std::size_t n_pairs, std::size_t num_classes, RngSeed seed,
                                double step = 1e-4);

/// Slopes for one pair (a, b) and perturbation `delta` of the first argument.
LipschitzReport probe_pair(double alpha, const std::vector<double>& a, const std::vector<double>& b,
                           const std::vector<double>& delta);

/// sup over the binary simplex of |grad_a L(a, b)|. With a - b = (d, -d) the
/// gradient norm is sqrt(2) * kappa(alpha) * |d|, so this is sqrt(2) * kappa.
double binary_gradient_norm_bound(double alpha);

/// KL value slopes at rho = (1/2, 1/2) and rho_tilde = (eps, 1 - eps) for
/// each eps, using a perturbation of relative size 1e-3 in rho_tilde.
std::vector<double> kl_slope_sequence(const std::vector<double>& eps_values);

struct GradientCheckReport {
  std::size_t configurations = 0;
  double worst_loss_error = 0.0;        // tv_star and SSC gradients
  double worst_end_to_end_error = 0.0;  // backward() over all parameters
};

/// Central-difference check (step 1e-6) of the loss gradients and of the full
/// backward pass, `per_alpha` random configurations of each kind per alpha.
/// Points with any |rho - rho_tilde| component below 1e-3 are skipped.
GradientCheckReport gradient_check(const std::vector<double>& alphas, std::size_t per_alpha, RngSeed seed);

}  // namespace llp::theory
