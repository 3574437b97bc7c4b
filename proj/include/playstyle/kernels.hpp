#pragma once

// Dense inner loops shared by the HSD network and the discretizers.
//
// Every kernel exists twice: `serial` is the plain reference kept for tests
// and benchmarks, `parallel` splits the outer loop across OpenMP threads.
// Each output element is produced by exactly one thread with a fixed
// summation order, so the parallel variants are deterministic for a given
// thread count and agree with the serial ones up to rounding.
//
// Matrices are row-major. A dense layer holds W as [out x in] and b as [out].

#include <cstddef>
#include <cstdint>
#include <span>

namespace playstyle::kernels {

namespace serial {

// Y[n x out] = X[n x in] * W^T + b
template <typename Real>
void dense_forward(std::span<const Real> x, std::span<const Real> w, std::span<const Real> b,
                   std::span<Real> y, std::size_t n, std::size_t in, std::size_t out);

// dX[n x in] = dY[n x out] * W   (overwrites dX)
template <typename Real>
void dense_backward_input(std::span<const Real> dy, std::span<const Real> w, std::span<Real> dx,
                          std::size_t n, std::size_t in, std::size_t out);

// dW[out x in] += dY^T * X,  db[out] += column sums of dY
template <typename Real>
void dense_backward_params(std::span<const Real> x, std::span<const Real> dy, std::span<Real> dw,
                           std::span<Real> db, std::size_t n, std::size_t in, std::size_t out);

// codes[i] = argmin_j ||z_i - e_j||^2 over n rows of width d against k rows.
// Ties resolve to the lowest j.
template <typename Real>
void nearest_rows(std::span<const Real> z, std::span<const Real> codebook,
                  std::span<std::uint32_t> codes, std::size_t n, std::size_t d, std::size_t k);

}  // namespace serial

namespace parallel {

template <typename Real>
void dense_forward(std::span<const Real> x, std::span<const Real> w, std::span<const Real> b,
                   std::span<Real> y, std::size_t n, std::size_t in, std::size_t out);

template <typename Real>
void dense_backward_input(std::span<const Real> dy, std::span<const Real> w, std::span<Real> dx,
                          std::size_t n, std::size_t in, std::size_t out);

template <typename Real>
void dense_backward_params(std::span<const Real> x, std::span<const Real> dy, std::span<Real> dw,
                           std::span<Real> db, std::size_t n, std::size_t in, std::size_t out);

template <typename Real>
void nearest_rows(std::span<const Real> z, std::span<const Real> codebook,
                  std::span<std::uint32_t> codes, std::size_t n, std::size_t d, std::size_t k);

}  // namespace parallel

}  // namespace playstyle::kernels
