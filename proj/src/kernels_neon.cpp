// NEON kernel variants for aarch64 builds (NEON is part of the aarch64
// baseline, so no runtime feature probe is needed beyond the architecture).
#include "dpsur/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace dpsur::kernels::neon {
namespace {

double dot_impl(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return vaddvq_f64(acc) + tail;
}

double squared_norm_impl(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t v = vld1q_f64(x + i);
    acc = vfmaq_f64(acc, v, v);
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += x[i] * x[i];
  return vaddvq_f64(acc) + tail;
}

// Non-fused mul+add keeps axpy bitwise-equal to the scalar reference.
void axpy_impl(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t prod = vmulq_f64(av, vld1q_f64(x + i));
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), prod));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale_impl(double* x, std::size_t n, double a) {
  const float64x2_t av = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(x + i, vmulq_f64(vld1q_f64(x + i), av));
  }
  for (; i < n; ++i) x[i] *= a;
}

}  // namespace

const KernelTable table{dot_impl, squared_norm_impl, axpy_impl, scale_impl};

}  // namespace dpsur::kernels::neon

#endif  // aarch64
