#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace llp {

enum class Errc {
  NegativeComponent,
  SumNotOne,
  TooFewClasses,
  NonFiniteInput,
  DimensionMismatch,
  EmptyBag,
  EmptyDataset,
  LabelOutOfRange,
  NonPositiveAlpha,
  ZeroNormEmbedding,
  InvalidArguments,
  KTooLarge,
  LengthMismatch,
  EmptyEvaluation,
  DivergedLoss,
  InvalidConfig,
  ParseError,
  IoError,
};

const char* to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline constexpr double kSimplexTolerance = 1e-9;

/// A probability vector over C >= 2 classes.
///
/// Only obtainable through make_simplex(), so every instance in the program
/// has non-negative components summing to 1 within kSimplexTolerance.
class SimplexVector {
 public:
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  bool operator==(const SimplexVector&) const = default;

 private:
  explicit SimplexVector(std::vector<double> values) : values_(std::move(values)) {}
  friend SimplexVector make_simplex(std::vector<double> values);

  std::vector<double> values_;
};

/// Validates and wraps `values`. Never renormalizes.
SimplexVector make_simplex(std::vector<double> values);

/// True when `values` would be accepted by make_simplex.
bool is_simplex(std::span<const double> values);

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// N x D features with integer labels in [0, num_classes). Labels are 0-based.
class LabeledDataset {
 public:
  LabeledDataset(FeatureMatrix features, std::vector<int> labels, int num_classes);

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  Eigen::Index dim() const noexcept { return features_.cols(); }
  int num_classes() const noexcept { return num_classes_; }

  const FeatureMatrix& features() const noexcept { return features_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  auto row(std::size_t i) const { return features_.row(static_cast<Eigen::Index>(i)); }

  LabeledDataset subset(std::span<const std::size_t> indices) const;

 private:
  FeatureMatrix features_;
  std::vector<int> labels_;
  int num_classes_;
};

struct Bag {
  std::vector<std::size_t> instance_indices;
  SimplexVector proportion;
};

/// Recounts the bag's labels in integer arithmetic and checks that every
/// proportion component is exactly count / |B|.
bool bag_is_consistent(const LabeledDataset& data, const Bag& bag);

struct RngSeed {
  std::uint64_t value = 0;
  bool operator==(const RngSeed&) const = default;
};

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Independent stream seed for (seed, stream) pairs, e.g. (run seed, epoch).
RngSeed derive_seed(RngSeed seed, std::uint64_t stream);

/// Uniform integer in [0, bound) by rejection; does not depend on the
/// standard library's distribution implementation.
std::uint64_t uniform_index(Rng& rng, std::uint64_t bound);

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(Rng& rng);

/// One draw from Dirichlet(1, ..., 1), i.e. uniform on the simplex.
std::vector<double> sample_uniform_simplex(Rng& rng, std::size_t num_classes);

}  // namespace llp
