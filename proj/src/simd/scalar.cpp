#include "nibm/simd.hpp"

#include <cmath>

namespace nibm::simd::detail {

namespace {

double inv_sq_sum(const double* a, std::size_t n, double x, double y2) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = x - a[k];
        s += 1.0 / (d * d + y2);
    }
    return s;
}

std::complex<double> cauchy_sum(const double* a, std::size_t n, std::complex<double> z) {
    const double zr = z.real(), zi = z.imag();
    const double zi2 = zi * zi;
    double re = 0.0, im = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = zr - a[k];
        const double inv = 1.0 / (d * d + zi2);
        re += d * inv;
        im -= zi * inv;
    }
    return {re, im};
}

void pair_repulsion(const double* x, std::size_t n, double* out) {
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            if (k != j) s += 1.0 / (x[j] - x[k]);
        out[j] = s;
    }
}

double distance_sum(const double* p, std::size_t np, const double* q, std::size_t nq,
                    std::size_t dim) {
    double total = 0.0;
    for (std::size_t i = 0; i < np; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < nq; ++j) {
            double d2 = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                const double diff = p[i * dim + d] - q[j * dim + d];
                d2 += diff * diff;
            }
            row += std::sqrt(d2);
        }
        total += row;
    }
    return total;
}

// TwoSum / TwoProd based dot product, accurate as if computed in twice the
// working precision.
double dot2(const double* a, const double* b, std::size_t n) {
    double s = 0.0, c = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double p = a[k] * b[k];
        const double ep = std::fma(a[k], b[k], -p);
        const double t = s + p;
        const double z = t - s;
        const double es = (s - (t - z)) + (p - z);
        s = t;
        c += es + ep;
    }
    return s + c;
}

} // namespace

const Table& scalar_table() {
    static const Table t{inv_sq_sum, cauchy_sum, pair_repulsion, distance_sum, dot2};
    return t;
}

} // namespace nibm::simd::detail
