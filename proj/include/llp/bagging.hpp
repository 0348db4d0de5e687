#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "llp/core.hpp"

namespace llp {

struct BagPlan {
  std::size_t bag_size = 1;
  // Keep the trailing short bag instead of dropping it for this epoch.
  bool keep_partial = true;
  RngSeed epoch_seed{};
};

/// Label histogram divided by the bag cardinality.
SimplexVector bag_proportions(std::span<const int> labels, int num_classes);

/// In-place Fisher-Yates (Durstenfeld) shuffle driven by uniform_index().
void fisher_yates_shuffle(std::span<std::size_t> items, Rng& rng);

/// Permutes the dataset with the plan's seed and chunks it into consecutive
/// bags of plan.bag_size. Each bag carries its ground-truth proportion.
std::vector<Bag> make_bags(const LabeledDataset& data, const BagPlan& plan);

/// Seed for epoch `epoch` of a run seeded with `run_seed`.
inline RngSeed epoch_seed(RngSeed run_seed, std::size_t epoch) { return derive_seed(run_seed, epoch); }

/// Isotropic unit-variance Gaussian blobs. Class c is centred at
/// separation * e_{c mod dim}; per-class counts are equal and rows are
/// emitted class by class.
LabeledDataset gen_blobs(std::size_t n_per_class, int num_classes, Eigen::Index dim, double separation,
                         RngSeed seed);

struct DatasetSplit {
  LabeledDataset train;
  LabeledDataset val;
  LabeledDataset test;
};

/// Shuffles and splits by fractions; the test part takes the remainder.
DatasetSplit split_dataset(const LabeledDataset& data, double train_fraction, double val_fraction, RngSeed seed);

}  // namespace llp
