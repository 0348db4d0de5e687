#pragma once

#include <vector>

#include "llp/core.hpp"

namespace llp {

struct LossParams {
  double alpha = 1.0;   // exponent of the parametrized TV loss, > 0
  double lambda = 0.0;  // weight of the contrastive auxiliary term, >= 0
};

void validate(const LossParams& params);

using EmbeddingMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// KL divergence sum_c rho_c log(rho_c / rho_tilde_c), natural log.
/// 0 log(0/q) is 0; p log(p/0) is +infinity (returned, not thrown).
double kl_proportion_loss(const SimplexVector& rho, const SimplexVector& rho_tilde);

/// d KL / d rho_tilde = -rho / rho_tilde. Infinite where rho_tilde_c = 0 < rho_c.
std::vector<double> kl_proportion_gradient(const SimplexVector& rho, const SimplexVector& rho_tilde);

/// Total variation distance 1/2 sum_c |rho_c - rho_tilde_c|.
double tv_distance(const SimplexVector& rho, const SimplexVector& rho_tilde);

/// 1/2 (sum_c |rho_c - rho_tilde_c|^alpha)^(2/alpha).
///
/// Symmetric in its arguments bit for bit, bounded by 2 for alpha >= 1, and
/// equal to 2 * tv_distance^2 at alpha = 1.
double tv_star_loss(const SimplexVector& rho, const SimplexVector& rho_tilde, double alpha);

/// Gradient of tv_star_loss with respect to rho_tilde:
///   S^(2/alpha - 1) |d_i|^(alpha - 1) sign(d_i),  d = rho_tilde - rho, S = sum |d|^alpha.
/// Coordinates with d_i = 0 get 0 (a subgradient at alpha = 1, and the cap
/// on the alpha < 1 singularity). The whole vector is 0 when rho == rho_tilde.
std::vector<double> tv_star_gradient(const SimplexVector& rho, const SimplexVector& rho_tilde, double alpha);

// Raw-span forms of the above, used by the model and the audits where the
// inputs are already known to be on the simplex (or deliberately perturbed
// slightly off it by a finite-difference probe).
double tv_star_loss(std::span<const double> rho, std::span<const double> rho_tilde, double alpha);
std::vector<double> tv_star_gradient(std::span<const double> rho, std::span<const double> rho_tilde, double alpha);
double kl_proportion_loss(std::span<const double> rho, std::span<const double> rho_tilde);

/// Contrastive auxiliary loss over one bag's embeddings with cosine
/// similarity s and no temperature:
///   1/|B| sum_j -log( exp(s(z_j, z_j)) / sum_k exp(s(z_j, z_k)) ).
/// The numerator similarity is evaluated literally (it is 1 up to rounding).
double ssc_loss(const EmbeddingMatrix& embeddings);

/// Analytic gradient of ssc_loss with respect to every embedding entry.
EmbeddingMatrix ssc_gradient(const EmbeddingMatrix& embeddings);

/// tv_star_loss + lambda * ssc_loss.
double combined_loss(const SimplexVector& rho, const SimplexVector& rho_tilde, const EmbeddingMatrix& embeddings,
                     const LossParams& params);

}  // namespace llp
