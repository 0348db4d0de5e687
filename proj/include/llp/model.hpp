#pragma once

#include <span>
#include <string>
#include <vector>

#include "llp/core.hpp"
#include "llp/losses.hpp"

namespace llp {

enum class Architecture { Linear, Mlp1 };
enum class LossKind { Dllp, TvStar, Combined };

const char* to_string(Architecture arch);
const char* to_string(LossKind kind);
Architecture parse_architecture(const std::string& text);
LossKind parse_loss_kind(const std::string& text);

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Softmax classifier f(x) = head(body(x)).
///
/// Linear: body is the identity, so the embedding is x itself and the head
/// is the only trainable part. Mlp1: body is tanh(W_hidden x + b_hidden) and
/// the contrastive term can move it. The hidden members are empty for Linear.
struct ModelParams {
  Architecture architecture = Architecture::Linear;
  Matrix w_hidden;  // H x D
  Vector b_hidden;  // H
  Matrix w_out;     // C x H (C x D for Linear)
  Vector b_out;     // C

  Eigen::Index input_dim() const;
  Eigen::Index embedding_dim() const { return w_out.cols(); }
  int num_classes() const { return static_cast<int>(w_out.rows()); }
  Eigen::Index parameter_count() const;

  /// Throws DimensionMismatch / NonFiniteInput when the shapes disagree or an
  /// entry is not finite.
  void validate() const;

  /// Same architecture and shapes, all entries zero.
  ModelParams zeros_like() const;

  bool operator==(const ModelParams& other) const;
};

/// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
ModelParams init_params(Architecture arch, Eigen::Index input_dim, Eigen::Index hidden_dim, int num_classes,
                        RngSeed seed);

/// Concatenation w_hidden, b_hidden, w_out, b_out (matrices row-major).
Vector flatten(const ModelParams& params);
void unflatten(const Vector& flat, ModelParams& params);

struct ForwardTrace {
  Vector pre_activation;  // hidden pre-activation (empty for Linear)
  Vector embedding;       // body(x)
  Vector logits;
  SimplexVector distribution;
};

/// Max-subtracted softmax.
Vector softmax(const Vector& logits);

ForwardTrace forward(const ModelParams& params, std::span<const double> x);
ForwardTrace forward(const ModelParams& params, const Vector& x);

/// Mean of the per-instance class distributions.
SimplexVector aggregate_predictions(std::span<const ForwardTrace> traces);

/// argmax of forward(); ties go to the lowest class index.
int predict(const ModelParams& params, std::span<const double> x);
std::vector<int> predict_all(const ModelParams& params, const FeatureMatrix& x);

/// Per-row class distributions for a batch.
Matrix predict_proba(const ModelParams& params, const FeatureMatrix& x);

struct BagForward {
  Matrix pre_activation;  // B x H (empty for Linear)
  Matrix embeddings;      // B x H (or B x D)
  Matrix probabilities;   // B x C
  SimplexVector rho_tilde;
};

BagForward forward_bag(const ModelParams& params, const FeatureMatrix& instances);

struct BagObjective {
  double proportion_loss = 0.0;  // KL for Dllp, tv_star for the other kinds
  double auxiliary_loss = 0.0;   // ssc_loss (Combined only)
  double total = 0.0;            // proportion_loss + lambda * auxiliary_loss
};

/// Loss of one bag without gradients.
BagObjective bag_loss(const ModelParams& params, const FeatureMatrix& instances, const SimplexVector& rho,
                      LossKind kind, const LossParams& loss_params);

struct BackwardResult {
  ModelParams gradient;
  BagObjective loss;
};

/// Exact gradient of the bag objective w.r.t. every parameter. The
/// contrastive term only reaches the hidden layer.
BackwardResult backward(const ModelParams& params, const FeatureMatrix& instances, const SimplexVector& rho,
                        LossKind kind, const LossParams& loss_params);

}  // namespace llp
