// Built with -mavx2 -mfma; only reached through the dispatch table after a
// runtime CPU check.
#include "nibm/simd.hpp"

#include <cmath>
#include <vector>

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace nibm::simd::detail {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double inv_sq_sum(const double* a, std::size_t n, double x, double y2) {
    const __m256d vx = _mm256_set1_pd(x);
    const __m256d vy2 = _mm256_set1_pd(y2);
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        __m256d d = _mm256_sub_pd(vx, _mm256_loadu_pd(a + k));
        __m256d den = _mm256_fmadd_pd(d, d, vy2);
        acc = _mm256_add_pd(acc, _mm256_div_pd(one, den));
    }
    double s = hsum(acc);
    for (; k < n; ++k) {
        const double d = x - a[k];
        s += 1.0 / (d * d + y2);
    }
    return s;
}

std::complex<double> cauchy_sum(const double* a, std::size_t n, std::complex<double> z) {
    const double zr = z.real(), zi = z.imag();
    const double zi2 = zi * zi;
    const __m256d vzr = _mm256_set1_pd(zr);
    const __m256d vzi2 = _mm256_set1_pd(zi2);
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d re = _mm256_setzero_pd();
    __m256d inv_acc = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        __m256d d = _mm256_sub_pd(vzr, _mm256_loadu_pd(a + k));
        __m256d inv = _mm256_div_pd(one, _mm256_fmadd_pd(d, d, vzi2));
        re = _mm256_fmadd_pd(d, inv, re);
        inv_acc = _mm256_add_pd(inv_acc, inv);
    }
    double sre = hsum(re);
    double sinv = hsum(inv_acc);
    for (; k < n; ++k) {
        const double d = zr - a[k];
        const double inv = 1.0 / (d * d + zi2);
        sre += d * inv;
        sinv += inv;
    }
    return {sre, -zi * sinv};
}

inline double repulsion_range(const double* x, std::size_t lo, std::size_t hi, double xj) {
    const __m256d vx = _mm256_set1_pd(xj);
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = lo;
    for (; k + 4 <= hi; k += 4)
        acc = _mm256_add_pd(acc, _mm256_div_pd(one, _mm256_sub_pd(vx, _mm256_loadu_pd(x + k))));
    double s = hsum(acc);
    for (; k < hi; ++k) s += 1.0 / (xj - x[k]);
    return s;
}

void pair_repulsion(const double* x, std::size_t n, double* out) {
    for (std::size_t j = 0; j < n; ++j)
        out[j] = repulsion_range(x, 0, j, x[j]) + repulsion_range(x, j + 1, n, x[j]);
}

double distance_sum(const double* p, std::size_t np, const double* q, std::size_t nq,
                    std::size_t dim) {
    // Structure-of-arrays copy of q so lanes run over points.
    std::vector<double> soa(dim * nq);
    for (std::size_t j = 0; j < nq; ++j)
        for (std::size_t d = 0; d < dim; ++d) soa[d * nq + j] = q[j * dim + d];
    double total = 0.0;
    for (std::size_t i = 0; i < np; ++i) {
        __m256d acc = _mm256_setzero_pd();
        std::size_t j = 0;
        for (; j + 4 <= nq; j += 4) {
            __m256d d2 = _mm256_setzero_pd();
            for (std::size_t d = 0; d < dim; ++d) {
                __m256d diff = _mm256_sub_pd(_mm256_set1_pd(p[i * dim + d]),
                                             _mm256_loadu_pd(&soa[d * nq + j]));
                d2 = _mm256_fmadd_pd(diff, diff, d2);
            }
            acc = _mm256_add_pd(acc, _mm256_sqrt_pd(d2));
        }
        double row = hsum(acc);
        for (; j < nq; ++j) {
            double d2 = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                const double diff = p[i * dim + d] - soa[d * nq + j];
                d2 += diff * diff;
            }
            row += std::sqrt(d2);
        }
        total += row;
    }
    return total;
}

// Four independent Dot2 accumulators, merged with scalar TwoSum at the end.
double dot2(const double* a, const double* b, std::size_t n) {
    __m256d s = _mm256_setzero_pd();
    __m256d c = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        __m256d va = _mm256_loadu_pd(a + k);
        __m256d vb = _mm256_loadu_pd(b + k);
        __m256d p = _mm256_mul_pd(va, vb);
        __m256d ep = _mm256_fmsub_pd(va, vb, p);
        __m256d t = _mm256_add_pd(s, p);
        __m256d z = _mm256_sub_pd(t, s);
        __m256d es = _mm256_add_pd(_mm256_sub_pd(s, _mm256_sub_pd(t, z)), _mm256_sub_pd(p, z));
        s = t;
        c = _mm256_add_pd(c, _mm256_add_pd(es, ep));
    }
    alignas(32) double sl[4], cl[4];
    _mm256_store_pd(sl, s);
    _mm256_store_pd(cl, c);
    double acc = 0.0, err = 0.0;
    auto two_sum = [&](double v) {
        const double t = acc + v;
        const double z = t - acc;
        err += (acc - (t - z)) + (v - z);
        acc = t;
    };
    for (int l = 0; l < 4; ++l) {
        two_sum(sl[l]);
        err += cl[l];
    }
    for (; k < n; ++k) {
        const double p = a[k] * b[k];
        err += std::fma(a[k], b[k], -p);
        two_sum(p);
    }
    return acc + err;
}

} // namespace

const Table* avx2_table() {
    static const Table t{inv_sq_sum, cauchy_sum, pair_repulsion, distance_sum, dot2};
    return &t;
}

} // namespace nibm::simd::detail

#else

namespace nibm::simd::detail {
const Table* avx2_table() { return nullptr; }
} // namespace nibm::simd::detail

#endif
