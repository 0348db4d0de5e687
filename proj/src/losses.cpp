#include "llp/losses.hpp"

#include <cmath>
#include <limits>

namespace llp {

namespace {

void require_same_size(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(Errc::DimensionMismatch, "class counts differ: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(Errc::NonPositiveAlpha, "alpha must be finite and > 0, got " + std::to_string(alpha));
  }
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Rows normalised to unit length, plus the original norms.
std::pair<EmbeddingMatrix, Eigen::VectorXd> normalise_rows(const EmbeddingMatrix& z) {
  if (z.rows() < 1 || z.cols() < 1) throw Error(Errc::EmptyBag, "embedding batch is empty");
  Eigen::VectorXd norms = z.rowwise().norm();
  for (Eigen::Index j = 0; j < z.rows(); ++j) {
    if (!std::isfinite(norms[j])) throw Error(Errc::NonFiniteInput, "non-finite embedding");
    if (norms[j] == 0.0) {
      throw Error(Errc::ZeroNormEmbedding, "embedding row " + std::to_string(j) + " has zero norm");
    }
  }
  EmbeddingMatrix u = z.array().colwise() / norms.array();
  return {std::move(u), std::move(norms)};
}

}  // namespace

void validate(const LossParams& params) {
  require_alpha(params.alpha);
  if (!(params.lambda >= 0.0) || !std::isfinite(params.lambda)) {
    throw Error(Errc::InvalidArguments, "lambda must be finite and >= 0");
  }
}

double kl_proportion_loss(std::span<const double> rho, std::span<const double> rho_tilde) {
  require_same_size(rho.size(), rho_tilde.size());
  double total = 0.0;
  for (std::size_t c = 0; c < rho.size(); ++c) {
    if (rho[c] == 0.0) continue;
    if (rho_tilde[c] == 0.0) return std::numeric_limits<double>::infinity();
    total += rho[c] * std::log(rho[c] / rho_tilde[c]);
  }
  // Rounding can push exact matches a hair below zero.
  return total < 0.0 ? 0.0 : total;
}

double kl_proportion_loss(const SimplexVector& rho, const SimplexVector& rho_tilde) {
  return kl_proportion_loss(rho.values(), rho_tilde.values());
}

std::vector<double> kl_proportion_gradient(const SimplexVector& rho, const SimplexVector& rho_tilde) {
  require_same_size(rho.size(), rho_tilde.size());
  std::vector<double> grad(rho.size(), 0.0);
  for (std::size_t c = 0; c < rho.size(); ++c) {
    if (rho[c] == 0.0) continue;
    grad[c] = rho_tilde[c] == 0.0 ? -std::numeric_limits<double>::infinity() : -rho[c] / rho_tilde[c];
  }
  return grad;
}

double tv_distance(const SimplexVector& rho, const SimplexVector& rho_tilde) {
  require_same_size(rho.size(), rho_tilde.size());
  double total = 0.0;
  for (std::size_t c = 0; c < rho.size(); ++c) total += std::abs(rho[c] - rho_tilde[c]);
  return 0.5 * total;
}

double tv_star_loss(std::span<const double> rho, std::span<const double> rho_tilde, double alpha) {
  require_alpha(alpha);
  require_same_size(rho.size(), rho_tilde.size());
  double s = 0.0;
  for (std::size_t c = 0; c < rho.size(); ++c) s += std::pow(std::abs(rho[c] - rho_tilde[c]), alpha);
  return 0.5 * std::pow(s, 2.0 / alpha);
}

double tv_star_loss(const SimplexVector& rho, const SimplexVector& rho_tilde, double alpha) {
  return tv_star_loss(rho.values(), rho_tilde.values(), alpha);
}

std::vector<double> tv_star_gradient(std::span<const double> rho, std::span<const double> rho_tilde, double alpha) {
  require_alpha(alpha);
  require_same_size(rho.size(), rho_tilde.size());
  const std::size_t n = rho.size();
  std::vector<double> grad(n, 0.0);
  double s = 0.0;
  for (std::size_t c = 0; c < n; ++c) s += std::pow(std::abs(rho_tilde[c] - rho[c]), alpha);
  if (s == 0.0) return grad;
  const double scale = std::pow(s, 2.0 / alpha - 1.0);
  for (std::size_t c = 0; c < n; ++c) {
    const double d = rho_tilde[c] - rho[c];
    if (d == 0.0) continue;
    grad[c] = scale * std::pow(std::abs(d), alpha - 1.0) * sign(d);
  }
  return grad;
}

std::vector<double> tv_star_gradient(const SimplexVector& rho, const SimplexVector& rho_tilde, double alpha) {
  return tv_star_gradient(rho.values(), rho_tilde.values(), alpha);
}

double ssc_loss(const EmbeddingMatrix& embeddings) {
  const auto [u, norms] = normalise_rows(embeddings);
  const Eigen::MatrixXd sim = u * u.transpose();
  const Eigen::Index n = sim.rows();
  double total = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double peak = sim.row(j).maxCoeff();
    const double log_denominator = peak + std::log((sim.row(j).array() - peak).exp().sum());
    total += log_denominator - sim(j, j);
  }
  const double loss = total / static_cast<double>(n);
  return loss < 0.0 ? 0.0 : loss;
}

EmbeddingMatrix ssc_gradient(const EmbeddingMatrix& embeddings) {
  const auto [u, norms] = normalise_rows(embeddings);
  const Eigen::MatrixXd sim = u * u.transpose();
  const Eigen::Index n = sim.rows();

  // dL/dS_jk = (softmax_k(S_j.) - [j == k]) / n
  Eigen::MatrixXd d_sim(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double peak = sim.row(j).maxCoeff();
    Eigen::RowVectorXd w = (sim.row(j).array() - peak).exp();
    w /= w.sum();
    w[j] -= 1.0;
    d_sim.row(j) = w / static_cast<double>(n);
  }
  // S = U U^T, so dL/dU = (G + G^T) U.
  const EmbeddingMatrix d_u = (d_sim + d_sim.transpose()) * u;

  // Through u = z / |z|: dL/dz = (g - (g . u) u) / |z|.
  EmbeddingMatrix grad(embeddings.rows(), embeddings.cols());
  for (Eigen::Index j = 0; j < n; ++j) {
    const double radial = d_u.row(j).dot(u.row(j));
    grad.row(j) = (d_u.row(j) - radial * u.row(j)) / norms[j];
  }
  return grad;
}

double combined_loss(const SimplexVector& rho, const SimplexVector& rho_tilde, const EmbeddingMatrix& embeddings,
                     const LossParams& params) {
  validate(params);
  const double proportion = tv_star_loss(rho, rho_tilde, params.alpha);
  if (params.lambda == 0.0) return proportion;
  return proportion + params.lambda * ssc_loss(embeddings);
}

}  // namespace llp
