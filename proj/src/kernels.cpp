#include "playstyle/kernels.hpp"

#include <limits>

namespace playstyle::kernels {

namespace serial {

template <typename Real>
void dense_forward(std::span<const Real> x, std::span<const Real> w, std::span<const Real> b,
                   std::span<Real> y, std::size_t n, std::size_t in, std::size_t out) {
  for (std::size_t i = 0; i < n; ++i) {
    const Real* xi = x.data() + i * in;
    for (std::size_t o = 0; o < out; ++o) {
      const Real* wo = w.data() + o * in;
      Real acc = b[o];
      for (std::size_t k = 0; k < in; ++k) acc += xi[k] * wo[k];
      y[i * out + o] = acc;
    }
  }
}

template <typename Real>
void dense_backward_input(std::span<const Real> dy, std::span<const Real> w, std::span<Real> dx,
                          std::size_t n, std::size_t in, std::size_t out) {
  for (std::size_t i = 0; i < n; ++i) {
    Real* dxi = dx.data() + i * in;
    for (std::size_t k = 0; k < in; ++k) dxi[k] = Real(0);
    for (std::size_t o = 0; o < out; ++o) {
      const Real g = dy[i * out + o];
      if (g == Real(0)) continue;
      const Real* wo = w.data() + o * in;
      for (std::size_t k = 0; k < in; ++k) dxi[k] += g * wo[k];
    }
  }
}

template <typename Real>
void dense_backward_params(std::span<const Real> x, std::span<const Real> dy, std::span<Real> dw,
                           std::span<Real> db, std::size_t n, std::size_t in, std::size_t out) {
  for (std::size_t o = 0; o < out; ++o) {
    Real* dwo = dw.data() + o * in;
    Real bias = Real(0);
    for (std::size_t i = 0; i < n; ++i) {
      const Real g = dy[i * out + o];
      bias += g;
      if (g == Real(0)) continue;
      const Real* xi = x.data() + i * in;
      for (std::size_t k = 0; k < in; ++k) dwo[k] += g * xi[k];
    }
    db[o] += bias;
  }
}

template <typename Real>
void nearest_rows(std::span<const Real> z, std::span<const Real> codebook,
                  std::span<std::uint32_t> codes, std::size_t n, std::size_t d, std::size_t k) {
  for (std::size_t i = 0; i < n; ++i) {
    const Real* zi = z.data() + i * d;
    Real best = std::numeric_limits<Real>::infinity();
    std::uint32_t arg = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const Real* ej = codebook.data() + j * d;
      Real dist = Real(0);
      for (std::size_t c = 0; c < d; ++c) {
        const Real diff = zi[c] - ej[c];
        dist += diff * diff;
      }
      if (dist < best) {
        best = dist;
        arg = static_cast<std::uint32_t>(j);
      }
    }
    codes[i] = arg;
  }
}

}  // namespace serial

namespace parallel {

template <typename Real>
void dense_forward(std::span<const Real> x, std::span<const Real> w, std::span<const Real> b,
                   std::span<Real> y, std::size_t n, std::size_t in, std::size_t out) {
  const Real* xp = x.data();
  const Real* wp = w.data();
  const Real* bp = b.data();
  Real* yp = y.data();
#pragma omp parallel for collapse(2) schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t o = 0; o < out; ++o) {
      const Real* xi = xp + i * in;
      const Real* wo = wp + o * in;
      Real acc = Real(0);
#pragma omp simd reduction(+ : acc)
      for (std::size_t k = 0; k < in; ++k) acc += xi[k] * wo[k];
      yp[i * out + o] = acc + bp[o];
    }
  }
}

template <typename Real>
void dense_backward_input(std::span<const Real> dy, std::span<const Real> w, std::span<Real> dx,
                          std::size_t n, std::size_t in, std::size_t out) {
  const Real* dyp = dy.data();
  const Real* wp = w.data();
  Real* dxp = dx.data();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    Real* dxi = dxp + i * in;
    for (std::size_t k = 0; k < in; ++k) dxi[k] = Real(0);
    for (std::size_t o = 0; o < out; ++o) {
      const Real g = dyp[i * out + o];
      if (g == Real(0)) continue;
      const Real* wo = wp + o * in;
#pragma omp simd
      for (std::size_t k = 0; k < in; ++k) dxi[k] += g * wo[k];
    }
  }
}

template <typename Real>
void dense_backward_params(std::span<const Real> x, std::span<const Real> dy, std::span<Real> dw,
                           std::span<Real> db, std::size_t n, std::size_t in, std::size_t out) {
  const Real* xp = x.data();
  const Real* dyp = dy.data();
  Real* dwp = dw.data();
  Real* dbp = db.data();
#pragma omp parallel for schedule(static)
  for (std::size_t o = 0; o < out; ++o) {
    Real* dwo = dwp + o * in;
    Real bias = Real(0);
    for (std::size_t i = 0; i < n; ++i) {
      const Real g = dyp[i * out + o];
      bias += g;
      if (g == Real(0)) continue;
      const Real* xi = xp + i * in;
#pragma omp simd
      for (std::size_t k = 0; k < in; ++k) dwo[k] += g * xi[k];
    }
    dbp[o] += bias;
  }
}

template <typename Real>
void nearest_rows(std::span<const Real> z, std::span<const Real> codebook,
                  std::span<std::uint32_t> codes, std::size_t n, std::size_t d, std::size_t k) {
  const Real* zp = z.data();
  const Real* ep = codebook.data();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const Real* zi = zp + i * d;
    Real best = std::numeric_limits<Real>::infinity();
    std::uint32_t arg = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const Real* ej = ep + j * d;
      Real dist = Real(0);
      for (std::size_t c = 0; c < d; ++c) {
        const Real diff = zi[c] - ej[c];
        dist += diff * diff;
      }
      if (dist < best) {
        best = dist;
        arg = static_cast<std::uint32_t>(j);
      }
    }
    codes[i] = arg;
  }
}

}  // namespace parallel

#define PLAYSTYLE_INSTANTIATE_KERNELS(NS, Real)                                                  \
  template void NS::dense_forward<Real>(std::span<const Real>, std::span<const Real>,            \
                                        std::span<const Real>, std::span<Real>, std::size_t,     \
                                        std::size_t, std::size_t);                               \
  template void NS::dense_backward_input<Real>(std::span<const Real>, std::span<const Real>,     \
                                               std::span<Real>, std::size_t, std::size_t,        \
                                               std::size_t);                                     \
  template void NS::dense_backward_params<Real>(std::span<const Real>, std::span<const Real>,    \
                                                std::span<Real>, std::span<Real>, std::size_t,   \
                                                std::size_t, std::size_t);                       \
  template void NS::nearest_rows<Real>(std::span<const Real>, std::span<const Real>,             \
                                       std::span<std::uint32_t>, std::size_t, std::size_t,       \
                                       std::size_t);

PLAYSTYLE_INSTANTIATE_KERNELS(serial, float)
PLAYSTYLE_INSTANTIATE_KERNELS(serial, double)
PLAYSTYLE_INSTANTIATE_KERNELS(parallel, float)
PLAYSTYLE_INSTANTIATE_KERNELS(parallel, double)

#undef PLAYSTYLE_INSTANTIATE_KERNELS

}  // namespace playstyle::kernels
