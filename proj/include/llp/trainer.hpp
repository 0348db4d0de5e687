#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "llp/bagging.hpp"
#include "llp/metrics.hpp"
#include "llp/model.hpp"

namespace llp {

enum class Optimizer { Sgd, AdaptiveMoment };

const char* to_string(Optimizer opt);
Optimizer parse_optimizer(const std::string& text);

struct TrainConfig {
  std::size_t bag_size = 16;
  std::size_t epochs = 10;
  double learning_rate = 1e-2;
  double alpha = 1.0;
  double lambda = 0.0;
  Optimizer optimizer = Optimizer::AdaptiveMoment;
  RngSeed seed{0};
  LossKind loss_kind = LossKind::TvStar;
  Architecture architecture = Architecture::Linear;
  Eigen::Index hidden = 16;
  bool keep_partial = true;
  // Global-norm gradient clip; 0 disables. Unset means 10 for DLLP and off
  // for the bounded losses.
  std::optional<double> clip_norm;

  double effective_clip_norm() const;
  LossParams loss_params() const { return LossParams{alpha, lambda}; }

  /// Throws InvalidConfig when an invariant is violated.
  void validate() const;

  bool operator==(const TrainConfig&) const = default;
};

struct TrainHistory {
  std::vector<double> train_loss;  // per-epoch mean proportion loss over training bags
  std::vector<double> val_loss;    // NaN when no validation set was given
  std::vector<double> seconds;     // wall-clock per epoch
  // Largest single-bag proportion loss seen in each epoch.
  std::vector<double> max_bag_loss;

  std::size_t epochs() const { return train_loss.size(); }
  bool has_validation() const;
};

struct TrainResult {
  ModelParams params;
  TrainHistory history;
};

/// Mean proportion loss over bags of `data` built with `plan`; labels only
/// enter through the bag proportions.
double mean_bag_loss(const ModelParams& params, const LabeledDataset& data, const BagPlan& plan, LossKind kind,
                     const LossParams& loss_params);

/// Bag-level training: fresh bags every epoch from an epoch-derived seed, one
/// optimizer step per bag.
TrainResult train(const LabeledDataset& data, const LabeledDataset& val, const TrainConfig& config);

/// Mean of (train + validation) loss over the final `last_k` epochs. With no
/// validation set only the training loss enters the sum.
double validation_score(const TrainHistory& history, std::size_t last_k = 3);

enum class SweepAxis { BagSize, Alpha, Lambda };

const char* to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& text);

/// `config` with the swept field replaced by `value`.
TrainConfig apply_axis(TrainConfig config, SweepAxis axis, double value);

struct SweepRow {
  double value = 0.0;
  std::uint64_t seed = 0;
  WeightedScores scores;
  double selection_score = 0.0;  // validation_score of the run
};

/// One independent run per (value, seed), evaluated at the instance level on
/// `test`. Rows come back ordered by value, then seed, whatever `jobs` is.
std::vector<SweepRow> sweep(const LabeledDataset& data, const LabeledDataset& val, const LabeledDataset& test,
                            const TrainConfig& base_config, SweepAxis axis, const std::vector<double>& values,
                            const std::vector<std::uint64_t>& seeds, std::size_t jobs = 1);

MetricsReport evaluate_model(const ModelParams& params, const LabeledDataset& test);

}  // namespace llp
