#include "llp/bagging.hpp"

#include <cmath>
#include <numeric>

namespace llp {

SimplexVector bag_proportions(std::span<const int> labels, int num_classes) {
  if (labels.empty()) throw Error(Errc::EmptyBag, "cannot take proportions of an empty bag");
  if (num_classes < 2) throw Error(Errc::TooFewClasses, "need at least 2 classes");
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw Error(Errc::LabelOutOfRange, "label " + std::to_string(y) + " outside [0, " +
                                             std::to_string(num_classes) + ")");
    }
    ++counts[static_cast<std::size_t>(y)];
  }
  const auto n = static_cast<double>(labels.size());
  std::vector<double> proportion(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) proportion[c] = static_cast<double>(counts[c]) / n;
  return make_simplex(std::move(proportion));
}

void fisher_yates_shuffle(std::span<std::size_t> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

std::vector<Bag> make_bags(const LabeledDataset& data, const BagPlan& plan) {
  if (data.empty()) throw Error(Errc::EmptyDataset, "cannot build bags from an empty dataset");
  if (plan.bag_size < 1) throw Error(Errc::InvalidArguments, "bag_size must be >= 1");

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(plan.epoch_seed.value);
  fisher_yates_shuffle(order, rng);

  std::vector<Bag> bags;
  bags.reserve(order.size() / plan.bag_size + 1);
  std::vector<int> labels;
  for (std::size_t start = 0; start < order.size(); start += plan.bag_size) {
    const std::size_t stop = std::min(order.size(), start + plan.bag_size);
    if (stop - start < plan.bag_size && !plan.keep_partial) break;
    std::vector<std::size_t> members(order.begin() + static_cast<std::ptrdiff_t>(start),
                                     order.begin() + static_cast<std::ptrdiff_t>(stop));
    labels.clear();
    for (std::size_t idx : members) labels.push_back(data.labels()[idx]);
    bags.push_back(Bag{std::move(members), bag_proportions(labels, data.num_classes())});
  }
  return bags;
}

LabeledDataset gen_blobs(std::size_t n_per_class, int num_classes, Eigen::Index dim, double separation,
                         RngSeed seed) {
  if (n_per_class < 1) throw Error(Errc::InvalidArguments, "n_per_class must be >= 1");
  if (num_classes < 2) throw Error(Errc::TooFewClasses, "need at least 2 classes");
  if (dim < 1) throw Error(Errc::InvalidArguments, "dim must be >= 1");
  if (!(separation >= 0.0) || !std::isfinite(separation)) {
    throw Error(Errc::InvalidArguments, "separation must be finite and >= 0");
  }
  const auto n = n_per_class * static_cast<std::size_t>(num_classes);
  FeatureMatrix x(static_cast<Eigen::Index>(n), dim);
  std::vector<int> y(n);
  Rng rng(seed.value);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::size_t row = 0;
  for (int c = 0; c < num_classes; ++c) {
    const Eigen::Index axis = c % dim;
    for (std::size_t k = 0; k < n_per_class; ++k, ++row) {
      for (Eigen::Index d = 0; d < dim; ++d) {
        x(static_cast<Eigen::Index>(row), d) = noise(rng) + (d == axis ? separation : 0.0);
      }
      y[row] = c;
    }
  }
  return LabeledDataset(std::move(x), std::move(y), num_classes);
}

DatasetSplit split_dataset(const LabeledDataset& data, double train_fraction, double val_fraction, RngSeed seed) {
  if (!(train_fraction > 0.0) || !(val_fraction >= 0.0) || train_fraction + val_fraction > 1.0) {
    throw Error(Errc::InvalidArguments, "split fractions must satisfy 0 < train, 0 <= val, train + val <= 1");
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed.value);
  fisher_yates_shuffle(order, rng);
  const auto n = static_cast<double>(order.size());
  const auto n_train = static_cast<std::size_t>(std::floor(n * train_fraction));
  const auto n_val = static_cast<std::size_t>(std::floor(n * val_fraction));
  std::span<const std::size_t> all(order);
  return DatasetSplit{data.subset(all.subspan(0, n_train)), data.subset(all.subspan(n_train, n_val)),
                      data.subset(all.subspan(n_train + n_val))};
}

}  // namespace llp
