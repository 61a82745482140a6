#pragma once

#include <complex>
#include <cstddef>

// Data-parallel inner loops with a scalar reference path and an AVX2 path.
// The active path is chosen once at startup from the CPU flags; setting
// NIBM_SIMD=scalar in the environment pins the reference path.
namespace nibm::simd {

enum class Isa { Scalar, Avx2 };

Isa active_isa();
bool avx2_available();
// Tests use this to run both paths in one process.
void force_isa(Isa isa);
const char* isa_name(Isa isa);

// sum_k 1 / ((x - a_k)^2 + y2)
double inv_sq_sum(const double* a, std::size_t n, double x, double y2);

// sum_k 1 / (z - a_k)
std::complex<double> cauchy_sum(const double* a, std::size_t n, std::complex<double> z);

// out_j = sum_{k != j} 1 / (x_j - x_k)
void pair_repulsion(const double* x, std::size_t n, double* out);

// sum_{i,j} |p_i - q_j| for row-major point sets of dimension dim.
double distance_sum(const double* p, std::size_t np, const double* q, std::size_t nq,
                    std::size_t dim);

// Dot product with error-free transformations (Ogita-Rump-Oishi Dot2).
double dot2(const double* a, const double* b, std::size_t n);

namespace detail {
struct Table {
    double (*inv_sq_sum)(const double*, std::size_t, double, double);
    std::complex<double> (*cauchy_sum)(const double*, std::size_t, std::complex<double>);
    void (*pair_repulsion)(const double*, std::size_t, double*);
    double (*distance_sum)(const double*, std::size_t, const double*, std::size_t, std::size_t);
    double (*dot2)(const double*, const double*, std::size_t);
};
const Table& scalar_table();
// Null when the translation unit was built without AVX2 support.
const Table* avx2_table();
} // namespace detail

} // namespace nibm::simd
