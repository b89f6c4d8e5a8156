#include "gpcc/nn/kernels.hpp"

#include <algorithm>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gpcc::nn::kernels
{
namespace
{

// Below this many multiply-adds the fork/join cost dominates.
constexpr std::size_t kParallelWork = 1u << 16;

int g_threads = 0;  // 0: OpenMP default

int active_threads()
{
#ifdef _OPENMP
  return g_threads > 0 ? g_threads : omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace

void set_num_threads(int n) { g_threads = std::max(n, 0); }

int num_threads() { return active_threads(); }

namespace reference
{

void gemm(const double * a, const double * b, double * c, std::size_t m, std::size_t k, std::size_t n)
{
  for (std::size_t i = 0; i < m; ++i) {
    double * ci = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      const double * bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) {
        ci[j] += av * bp[j];
      }
    }
  }
}

void gemm_tn(const double * a, const double * b, double * c, std::size_t m, std::size_t k, std::size_t n)
{
  for (std::size_t r = 0; r < m; ++r) {
    const double * br = b + r * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[r * k + p];
      double * cp = c + p * n;
      for (std::size_t j = 0; j < n; ++j) {
        cp[j] += av * br[j];
      }
    }
  }
}

void gemm_nt(const double * a, const double * b, double * c, std::size_t m, std::size_t n, std::size_t k)
{
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        acc += a[i * n + j] * b[p * n + j];
      }
      c[i * k + p] += acc;
    }
  }
}

}  // namespace reference

namespace parallel
{

void gemm(const double * a, const double * b, double * c, std::size_t m, std::size_t k, std::size_t n)
{
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static) num_threads(active_threads())
  for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double * ci = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      const double * bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) {
        ci[j] += av * bp[j];
      }
    }
  }
}

void gemm_tn(const double * a, const double * b, double * c, std::size_t m, std::size_t k, std::size_t n)
{
  // Each thread owns a band of output rows and walks all input rows in order.
  const auto out_rows = static_cast<std::ptrdiff_t>(k);
#pragma omp parallel for schedule(static) num_threads(active_threads())
  for (std::ptrdiff_t pp = 0; pp < out_rows; ++pp) {
    const auto p = static_cast<std::size_t>(pp);
    double * cp = c + p * n;
    for (std::size_t r = 0; r < m; ++r) {
      const double av = a[r * k + p];
      const double * br = b + r * n;
      for (std::size_t j = 0; j < n; ++j) {
        cp[j] += av * br[j];
      }
    }
  }
}

void gemm_nt(const double * a, const double * b, double * c, std::size_t m, std::size_t n, std::size_t k)
{
  // Transposing b turns the dot products into contiguous row updates. Each output row is
  // built in a zeroed scratch row first so the per-element sum matches the reference.
  std::vector<double> bt(n * k);
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t j = 0; j < n; ++j) {
      bt[j * k + p] = b[p * n + j];
    }
  }
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel num_threads(active_threads())
  {
    std::vector<double> scratch(k);
#pragma omp for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      std::fill(scratch.begin(), scratch.end(), 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        const double av = a[i * n + j];
        const double * bj = bt.data() + j * k;
        for (std::size_t p = 0; p < k; ++p) {
          scratch[p] += av * bj[p];
        }
      }
      double * ci = c + i * k;
      for (std::size_t p = 0; p < k; ++p) {
        ci[p] += scratch[p];
      }
    }
  }
}

}  // namespace parallel

void gemm(const double * a, const double * b, double * c, std::size_t m, std::size_t k, std::size_t n)
{
  if (m * k * n >= kParallelWork && active_threads() > 1) {
    parallel::gemm(a, b, c, m, k, n);
  } else {
    reference::gemm(a, b, c, m, k, n);
  }
}

void gemm_tn(const double * a, const double * b, double * c, std::size_t m, std::size_t k, std::size_t n)
{
  if (m * k * n >= kParallelWork && active_threads() > 1) {
    parallel::gemm_tn(a, b, c, m, k, n);
  } else {
    reference::gemm_tn(a, b, c, m, k, n);
  }
}

void gemm_nt(const double * a, const double * b, double * c, std::size_t m, std::size_t n, std::size_t k)
{
  // The transposed layout vectorises, so it is used even on one thread.
  if (m * k * n >= kParallelWork) {
    parallel::gemm_nt(a, b, c, m, n, k);
  } else {
    reference::gemm_nt(a, b, c, m, n, k);
  }
}

}  // namespace gpcc::nn::kernels
