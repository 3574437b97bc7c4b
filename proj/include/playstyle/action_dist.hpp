#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace playstyle {

struct CategoricalDist {
  std::vector<double> probs;
};

struct GaussianDist {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

inline constexpr double kCovarianceRidge = 1e-6;
inline constexpr double kKlSmoothing = 1e-8;

// Empirical frequencies. Throws EstimationError on an empty multiset and
// ShapeError for an index >= n_actions.
CategoricalDist fit_categorical(std::span<const std::uint32_t> actions, std::uint32_t n_actions);

// `values` holds n vectors of width `dim` back to back. Maximum-likelihood
// covariance (divide by n) plus kCovarianceRidge * I.
GaussianDist fit_gaussian(std::span<const float> values, std::size_t dim);
GaussianDist fit_gaussian(std::span<const double> values, std::size_t dim);

// Euclidean / L1 norm of the probability-vector difference.
double w2_categorical(const CategoricalDist& p, const CategoricalDist& q);
double w1_categorical(const CategoricalDist& p, const CategoricalDist& q);

// KL(p || q) after smoothing both sides to (x + eps) / (1 + n eps).
double kl_categorical(const CategoricalDist& p, const CategoricalDist& q);
// (KL(p||q) + KL(q||p)) / 2
double mkl_categorical(const CategoricalDist& p, const CategoricalDist& q);

// Symmetric square root of a symmetric PSD matrix via eigendecomposition.
// Eigenvalues below zero (round-off) are clamped. Throws ShapeError when the
// input is not square or not symmetric within 1e-9.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m);

// ||m1 - m2|| + tr(C1 + C2 - 2 (C2^1/2 C1 C2^1/2)^1/2)
//
// The mean term is the plain norm, not its square. `squared_mean` switches to
// the usual Frechet form ||m1 - m2||^2. A slightly negative trace term from
// round-off is clamped to zero.
double w2_gaussian(const GaussianDist& a, const GaussianDist& b, bool squared_mean = false);

// Same as above with sqrt(C2) precomputed; used when one side is compared
// against many.
double w2_gaussian(const GaussianDist& a, const GaussianDist& b, const Eigen::MatrixXd& sqrt_cov_b,
                   bool squared_mean = false);

}  // namespace playstyle
