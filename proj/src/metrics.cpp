#include "llp/metrics.hpp"

#include <nlohmann/json.hpp>

#include "llp/core.hpp"
#include "llp/io.hpp"

namespace llp {

ConfusionMatrix::ConfusionMatrix(int num_classes)
    : num_classes_(num_classes), counts_(static_cast<std::size_t>(num_classes > 0 ? num_classes * num_classes : 0), 0) {
  if (num_classes < 1) throw Error(Errc::InvalidArguments, "confusion matrix needs at least one class");
}

std::uint64_t ConfusionMatrix::at(int truth, int predicted) const {
  return counts_.at(static_cast<std::size_t>(truth * num_classes_ + predicted));
}

void ConfusionMatrix::add(int truth, int predicted) {
  if (truth < 0 || truth >= num_classes_ || predicted < 0 || predicted >= num_classes_) {
    throw Error(Errc::LabelOutOfRange, "label pair (" + std::to_string(truth) + ", " + std::to_string(predicted) +
                                           ") outside [0, " + std::to_string(num_classes_) + ")");
  }
  ++counts_[static_cast<std::size_t>(truth * num_classes_ + predicted)];
  ++total_;
}

std::uint64_t ConfusionMatrix::row_sum(int truth) const {
  std::uint64_t s = 0;
  for (int j = 0; j < num_classes_; ++j) s += at(truth, j);
  return s;
}

std::uint64_t ConfusionMatrix::column_sum(int predicted) const {
  std::uint64_t s = 0;
  for (int i = 0; i < num_classes_; ++i) s += at(i, predicted);
  return s;
}

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, int num_classes) {
  if (y_true.size() != y_pred.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(y_true.size()) + " labels vs " + std::to_string(y_pred.size()) +
                                          " predictions");
  }
  ConfusionMatrix cm(num_classes);
  for (std::size_t k = 0; k < y_true.size(); ++k) cm.add(y_true[k], y_pred[k]);
  return cm;
}

WeightedScores weighted_prf(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error(Errc::EmptyEvaluation, "no instances to score");
  const auto n = static_cast<double>(cm.total());
  WeightedScores out;
  for (int c = 0; c < cm.num_classes(); ++c) {
    const auto hit = static_cast<double>(cm.at(c, c));
    const auto support = static_cast<double>(cm.row_sum(c));
    const auto predicted = static_cast<double>(cm.column_sum(c));
    const double precision = predicted > 0 ? hit / predicted : 0.0;
    const double recall = support > 0 ? hit / support : 0.0;
    const double f1 = precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    const double weight = support / n;
    out.precision += weight * precision;
    out.recall += weight * recall;
    out.f1 += weight * f1;
  }
  return out;
}

MetricsReport evaluate_predictions(std::span<const int> y_true, std::span<const int> y_pred, int num_classes) {
  auto cm = confusion(y_true, y_pred, num_classes);
  const auto scores = weighted_prf(cm);
  return MetricsReport{std::move(cm), scores};
}

std::string to_json(const MetricsReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < report.confusion.num_classes(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < report.confusion.num_classes(); ++j) row.push_back(report.confusion.at(i, j));
    rows.push_back(std::move(row));
  }
  nlohmann::ordered_json doc;
  doc["w_precision"] = report.scores.precision;
  doc["w_recall"] = report.scores.recall;
  doc["w_f1"] = report.scores.f1;
  doc["confusion"] = rows;
  return doc.dump();
}

std::string csv_header() { return "w_precision,w_recall,w_f1"; }

std::string to_csv_row(const MetricsReport& report) {
  return format_double(report.scores.precision) + "," + format_double(report.scores.recall) + "," +
         format_double(report.scores.f1);
}

}  // namespace llp
