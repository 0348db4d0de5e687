#include "llp/core.hpp"

#include <cmath>
#include <numeric>

namespace llp {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::NegativeComponent: return "NegativeComponent";
    case Errc::SumNotOne: return "SumNotOne";
    case Errc::TooFewClasses: return "TooFewClasses";
    case Errc::NonFiniteInput: return "NonFiniteInput";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::EmptyBag: return "EmptyBag";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::LabelOutOfRange: return "LabelOutOfRange";
    case Errc::NonPositiveAlpha: return "NonPositiveAlpha";
    case Errc::ZeroNormEmbedding: return "ZeroNormEmbedding";
    case Errc::InvalidArguments: return "InvalidArguments";
    case Errc::KTooLarge: return "KTooLarge";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptyEvaluation: return "EmptyEvaluation";
    case Errc::DivergedLoss: return "DivergedLoss";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

namespace {

void check_simplex(std::span<const double> values) {
  if (values.size() < 2) {
    throw Error(Errc::TooFewClasses, "a class distribution needs at least 2 components");
  }
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(Errc::NonFiniteInput, "non-finite simplex component");
    if (v < 0.0) throw Error(Errc::NegativeComponent, "negative simplex component " + std::to_string(v));
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    throw Error(Errc::SumNotOne, "components sum to " + std::to_string(sum));
  }
}

}  // namespace

SimplexVector make_simplex(std::vector<double> values) {
  check_simplex(values);
  return SimplexVector(std::move(values));
}

bool is_simplex(std::span<const double> values) {
  try {
    check_simplex(values);
    return true;
  } catch (const Error&) {
    return false;
  }
}

LabeledDataset::LabeledDataset(FeatureMatrix features, std::vector<int> labels, int num_classes)
    : features_(std::move(features)), labels_(std::move(labels)), num_classes_(num_classes) {
  if (num_classes_ < 2) throw Error(Errc::TooFewClasses, "datasets need at least 2 classes");
  if (static_cast<std::size_t>(features_.rows()) != labels_.size()) {
    throw Error(Errc::LengthMismatch, "feature rows and labels differ in count");
  }
  if (features_.cols() < 1) throw Error(Errc::DimensionMismatch, "feature dimension must be >= 1");
  if (!features_.allFinite()) throw Error(Errc::NonFiniteInput, "dataset contains non-finite features");
  for (int y : labels_) {
    if (y < 0 || y >= num_classes_) {
      throw Error(Errc::LabelOutOfRange, "label " + std::to_string(y) + " outside [0, " +
                                             std::to_string(num_classes_) + ")");
    }
  }
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  FeatureMatrix f(static_cast<Eigen::Index>(indices.size()), features_.cols());
  std::vector<int> y;
  y.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    f.row(static_cast<Eigen::Index>(k)) = row(indices[k]);
    y.push_back(labels_.at(indices[k]));
  }
  return LabeledDataset(std::move(f), std::move(y), num_classes_);
}

bool bag_is_consistent(const LabeledDataset& data, const Bag& bag) {
  const auto n = bag.instance_indices.size();
  if (n == 0 || bag.proportion.size() != static_cast<std::size_t>(data.num_classes())) return false;
  std::vector<std::size_t> counts(bag.proportion.size(), 0);
  for (std::size_t idx : bag.instance_indices) {
    if (idx >= data.size()) return false;
    ++counts[static_cast<std::size_t>(data.labels()[idx])];
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (bag.proportion[c] != static_cast<double>(counts[c]) / static_cast<double>(n)) return false;
  }
  return true;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngSeed derive_seed(RngSeed seed, std::uint64_t stream) {
  return RngSeed{splitmix64(splitmix64(seed.value) ^ splitmix64(stream + 0x632be59bd9b4e019ULL))};
}

std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
  if (bound == 0) throw Error(Errc::InvalidArguments, "uniform_index bound must be positive");
  // Reject the top partial block so every residue is equally likely.
  const std::uint64_t limit = Rng::max() - (Rng::max() % bound);
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return draw % bound;
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<double> sample_uniform_simplex(Rng& rng, std::size_t num_classes) {
  std::vector<double> out(num_classes);
  double total = 0.0;
  for (auto& v : out) {
    v = -std::log1p(-uniform01(rng));
    total += v;
  }
  if (total <= 0.0) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(num_classes));
    return out;
  }
  for (auto& v : out) v /= total;
  return out;
}

}  // namespace llp
