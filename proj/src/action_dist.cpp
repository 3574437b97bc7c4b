#include "playstyle/action_dist.hpp"

#include <algorithm>
#include <cmath>

#include "playstyle/errors.hpp"

namespace playstyle {

namespace {

void require_same_length(const CategoricalDist& p, const CategoricalDist& q) {
  if (p.probs.size() != q.probs.size()) {
    throw ShapeError("categorical distributions differ in length: " + std::to_string(p.probs.size()) +
                     " vs " + std::to_string(q.probs.size()));
  }
}

template <typename T>
GaussianDist fit_gaussian_impl(std::span<const T> values, std::size_t dim) {
  if (dim == 0) throw ShapeError("fit_gaussian: zero dimension");
  if (values.empty()) throw EstimationError("fit_gaussian: empty sample");
  if (values.size() % dim != 0) throw ShapeError("fit_gaussian: inconsistent vector widths");
  const std::size_t n = values.size() / dim;
  const auto d = static_cast<Eigen::Index>(dim);

  GaussianDist g{Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Zero(d, d)};
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) g.mean[k] += static_cast<double>(values[i * dim + k]);
  }
  g.mean /= static_cast<double>(n);

  Eigen::VectorXd centered(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) centered[k] = static_cast<double>(values[i * dim + k]) - g.mean[k];
    g.cov.selfadjointView<Eigen::Lower>().rankUpdate(centered);
  }
  g.cov = g.cov.selfadjointView<Eigen::Lower>();
  g.cov /= static_cast<double>(n);
  g.cov.diagonal().array() += kCovarianceRidge;
  return g;
}

double trace_term(const GaussianDist& a, const GaussianDist& b, const Eigen::MatrixXd& sqrt_cov_b) {
  const Eigen::MatrixXd inner = sqrt_cov_b * a.cov * sqrt_cov_b;
  // Symmetrize to absorb round-off before the second square root.
  const Eigen::MatrixXd cross = psd_sqrt(0.5 * (inner + inner.transpose()));
  const double t = a.cov.trace() + b.cov.trace() - 2.0 * cross.trace();
  return std::max(t, 0.0);
}

}  // namespace

CategoricalDist fit_categorical(std::span<const std::uint32_t> actions, std::uint32_t n_actions) {
  if (actions.empty()) throw EstimationError("fit_categorical: empty action multiset");
  CategoricalDist d{std::vector<double>(n_actions, 0.0)};
  for (auto a : actions) {
    if (a >= n_actions) throw ShapeError("fit_categorical: action index out of range");
    d.probs[a] += 1.0;
  }
  const double total = static_cast<double>(actions.size());
  for (auto& p : d.probs) p /= total;
  return d;
}

GaussianDist fit_gaussian(std::span<const float> values, std::size_t dim) {
  return fit_gaussian_impl(values, dim);
}

GaussianDist fit_gaussian(std::span<const double> values, std::size_t dim) {
  return fit_gaussian_impl(values, dim);
}

double w2_categorical(const CategoricalDist& p, const CategoricalDist& q) {
  require_same_length(p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.probs.size(); ++i) {
    const double d = p.probs[i] - q.probs[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double w1_categorical(const CategoricalDist& p, const CategoricalDist& q) {
  require_same_length(p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.probs.size(); ++i) s += std::abs(p.probs[i] - q.probs[i]);
  return s;
}

double kl_categorical(const CategoricalDist& p, const CategoricalDist& q) {
  require_same_length(p, q);
  const double n = static_cast<double>(p.probs.size());
  const double norm = 1.0 + n * kKlSmoothing;
  double s = 0.0;
  for (std::size_t i = 0; i < p.probs.size(); ++i) {
    const double ps = (p.probs[i] + kKlSmoothing) / norm;
    const double qs = (q.probs[i] + kKlSmoothing) / norm;
    s += ps * std::log(ps / qs);
  }
  return std::max(s, 0.0);
}

double mkl_categorical(const CategoricalDist& p, const CategoricalDist& q) {
  return 0.5 * (kl_categorical(p, q) + kl_categorical(q, p));
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw ShapeError("psd_sqrt: matrix is not square");
  if (m.rows() == 0) return m;
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw ShapeError("psd_sqrt: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

double w2_gaussian(const GaussianDist& a, const GaussianDist& b, bool squared_mean) {
  if (a.mean.size() != b.mean.size() || a.cov.rows() != b.cov.rows()) {
    throw ShapeError("w2_gaussian: dimension mismatch");
  }
  return w2_gaussian(a, b, psd_sqrt(b.cov), squared_mean);
}

double w2_gaussian(const GaussianDist& a, const GaussianDist& b, const Eigen::MatrixXd& sqrt_cov_b,
                   bool squared_mean) {
  if (a.mean.size() != b.mean.size() || a.cov.rows() != b.cov.rows() ||
      sqrt_cov_b.rows() != b.cov.rows()) {
    throw ShapeError("w2_gaussian: dimension mismatch");
  }
  const double mean_dist = squared_mean ? (a.mean - b.mean).squaredNorm() : (a.mean - b.mean).norm();
  return mean_dist + trace_term(a, b, sqrt_cov_b);
}

}  // namespace playstyle
