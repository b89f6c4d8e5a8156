#ifndef GPCC__NN__KERNELS_HPP_
#define GPCC__NN__KERNELS_HPP_

#include <cstddef>

// Dense row-major matrix kernels. Every kernel exists twice: a plain serial loop nest in
// `reference`, kept for testing, and an OpenMP version in `parallel` that splits the output
// rows across threads. Both add the products for one output element in the same order, so
// their results are bit-identical for any thread count.

namespace gpcc::nn::kernels
{

namespace reference
{
/// c[m,n] += a[m,k] * b[k,n]
void gemm(const double * a, const double * b, double * c, std::size_t m, std::size_t k, std::size_t n);
/// c[k,n] += a[m,k]^T * b[m,n]
void gemm_tn(const double * a, const double * b, double * c, std::size_t m, std::size_t k, std::size_t n);
/// c[m,k] += a[m,n] * b[k,n]^T
void gemm_nt(const double * a, const double * b, double * c, std::size_t m, std::size_t n, std::size_t k);
}  // namespace reference

namespace parallel
{
void gemm(const double * a, const double * b, double * c, std::size_t m, std::size_t k, std::size_t n);
void gemm_tn(const double * a, const double * b, double * c, std::size_t m, std::size_t k, std::size_t n);
void gemm_nt(const double * a, const double * b, double * c, std::size_t m, std::size_t n, std::size_t k);
}  // namespace parallel

/// Dispatching entry points: parallel above a work threshold, reference below it.
void gemm(const double * a, const double * b, double * c, std::size_t m, std::size_t k, std::size_t n);
void gemm_tn(const double * a, const double * b, double * c, std::size_t m, std::size_t k, std::size_t n);
void gemm_nt(const double * a, const double * b, double * c, std::size_t m, std::size_t n, std::size_t k);

/// Thread count used by the parallel kernels; 1 forces serial execution.
void set_num_threads(int n);
int num_threads();

}  // namespace gpcc::nn::kernels

#endif  // GPCC__NN__KERNELS_HPP_
