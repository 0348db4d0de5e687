#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace llp {

/// Rows are the true class, columns the predicted class.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes);

  int num_classes() const noexcept { return num_classes_; }
  std::uint64_t at(int truth, int predicted) const;
  void add(int truth, int predicted);
  std::uint64_t total() const noexcept { return total_; }
  std::uint64_t row_sum(int truth) const;
  std::uint64_t column_sum(int predicted) const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  int num_classes_;
  std::uint64_t total_ = 0;
  std::vector<std::uint64_t> counts_;
};

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, int num_classes);

struct WeightedScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Support-weighted precision, recall and F1. Undefined per-class ratios
/// (empty row or column) count as 0.
WeightedScores weighted_prf(const ConfusionMatrix& cm);

struct MetricsReport {
  ConfusionMatrix confusion;
  WeightedScores scores;
};

MetricsReport evaluate_predictions(std::span<const int> y_true, std::span<const int> y_pred, int num_classes);

/// `{"w_precision":..,"w_recall":..,"w_f1":..,"confusion":[[..],..]}`
std::string to_json(const MetricsReport& report);

/// `w_precision,w_recall,w_f1`
std::string csv_header();
std::string to_csv_row(const MetricsReport& report);

}  // namespace llp
