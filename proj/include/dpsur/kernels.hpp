#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel inner loops of the training path (dot products, norms,
// scaled accumulation). A scalar reference implementation is always
// available; on x86-64 an AVX2+FMA variant and on aarch64 a NEON variant
// are selected at runtime when the CPU supports them. The environment
// variable DPSUR_KERNELS=scalar|avx2|neon overrides the automatic choice.
//
// Contract between backends:
//   - axpy and scale are elementwise with a single rounding per element
//     (no fused multiply-add), so every backend produces bitwise-identical
//     results for them.
//   - dot and squared_norm are reductions; SIMD backends reassociate the
//     sum, so results agree with the scalar reference only up to rounding.
namespace dpsur::kernels {

enum class Backend { scalar, avx2, neon };

Backend active_backend();
bool backend_supported(Backend b);
void set_backend(Backend b);  // throws std::invalid_argument if unsupported
std::string_view backend_name(Backend b);

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> x);
// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
// x *= a
void scale(std::span<double> x, double a);

// Scalar reference path, callable directly regardless of the active
// backend. The SIMD equivalence tests treat these as the oracle.
namespace ref {
double dot(const double* a, const double* b, std::size_t n);
double squared_norm(const double* x, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scale(double* x, std::size_t n, double a);
}  // namespace ref

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*squared_norm)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double*, std::size_t, double);
};

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
extern const KernelTable table;
}
#endif
#if defined(__aarch64__)
namespace neon {
extern const KernelTable table;
}
#endif

}  // namespace dpsur::kernels
