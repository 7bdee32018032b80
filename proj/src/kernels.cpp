#include "dpsur/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace dpsur::kernels {

namespace ref {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double squared_norm(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(double* x, std::size_t n, double a) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

}  // namespace ref

namespace {

const KernelTable kScalarTable{ref::dot, ref::squared_norm, ref::axpy,
                               ref::scale};

bool cpu_supports(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::neon:
#if defined(__aarch64__)
      return true;  // NEON is baseline on aarch64
#else
      return false;
#endif
  }
  return false;
}

const KernelTable* table_for(Backend b) {
  switch (b) {
    case Backend::scalar:
      return &kScalarTable;
    case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return &avx2::table;
#else
      return nullptr;
#endif
    case Backend::neon:
#if defined(__aarch64__)
      return &neon::table;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

Backend pick_default() {
  if (const char* env = std::getenv("DPSUR_KERNELS")) {
    const std::string want(env);
    Backend b = Backend::scalar;
    if (want == "avx2") b = Backend::avx2;
    else if (want == "neon") b = Backend::neon;
    else if (want != "scalar")
      throw std::invalid_argument("DPSUR_KERNELS: unknown backend '" + want +
                                  "'");
    if (!cpu_supports(b))
      throw std::invalid_argument("DPSUR_KERNELS: backend '" + want +
                                  "' not supported on this host");
    return b;
  }
  if (cpu_supports(Backend::avx2)) return Backend::avx2;
  if (cpu_supports(Backend::neon)) return Backend::neon;
  return Backend::scalar;
}

struct Dispatch {
  Backend backend;
  const KernelTable* table;
  Dispatch() : backend(pick_default()), table(table_for(backend)) {}
};

Dispatch& dispatch() {
  static Dispatch d;
  return d;
}

}  // namespace

Backend active_backend() { return dispatch().backend; }

bool backend_supported(Backend b) { return cpu_supports(b); }

void set_backend(Backend b) {
  if (!cpu_supports(b))
    throw std::invalid_argument(std::string("kernel backend '") +
                                std::string(backend_name(b)) +
                                "' not supported on this host");
  dispatch().backend = b;
  dispatch().table = table_for(b);
}

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
  }
  return "?";
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("kernels::dot: length mismatch");
  return dispatch().table->dot(a.data(), b.data(), a.size());
}

double squared_norm(std::span<const double> x) {
  return dispatch().table->squared_norm(x.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("kernels::axpy: length mismatch");
  dispatch().table->axpy(a, x.data(), y.data(), x.size());
}

void scale(std::span<double> x, double a) {
  dispatch().table->scale(x.data(), x.size(), a);
}

}  // namespace dpsur::kernels
