#include "nibm/stats.hpp"

#include "nibm/error.hpp"
#include "nibm/simd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace nibm::stats {

Proportion wilson(std::size_t hits, std::size_t total, double z) {
    if (total == 0) throw DomainError("wilson: no trials");
    if (hits > total) throw DomainError("wilson: more hits than trials");
    Proportion p;
    p.hits = hits;
    p.total = total;
    const double n = static_cast<double>(total), ph = hits / n, z2 = z * z;
    p.value = ph;
    const double centre = (ph + z2 / (2 * n)) / (1 + z2 / n);
    const double half = z * std::sqrt(ph * (1 - ph) / n + z2 / (4 * n * n)) / (1 + z2 / n);
    p.lo = std::max(0.0, centre - half);
    p.hi = std::min(1.0, centre + half);
    return p;
}

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw DomainError("ks_distance: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, std::abs((i + 1) / n - f), std::abs(f - i / n)});
    }
    return d;
}

double empirical_cdf(const std::vector<double>& sample, double a) {
    if (sample.empty()) throw DomainError("empirical_cdf: empty sample");
    const auto hits = std::count_if(sample.begin(), sample.end(), [a](double x) { return x <= a; });
    return static_cast<double>(hits) / static_cast<double>(sample.size());
}

EnergyTest energy_test(const std::vector<double>& x, const std::vector<double>& y, std::size_t dim,
                       std::size_t permutations, std::uint64_t seed) {
    if (dim == 0 || x.size() % dim || y.size() % dim) throw DomainError("energy_test: bad point layout");
    const std::size_t nx = x.size() / dim, ny = y.size() / dim;
    if (nx < 2 || ny < 2) throw DomainError("energy_test needs two points per sample");
    std::vector<double> pool(x);
    pool.insert(pool.end(), y.begin(), y.end());

    auto stat = [&](const std::vector<double>& pts) {
        const double* a = pts.data();
        const double* b = pts.data() + nx * dim;
        const double xy = simd::distance_sum(a, nx, b, ny, dim) / (double(nx) * ny);
        const double xx = simd::distance_sum(a, nx, a, nx, dim) / (double(nx) * nx);
        const double yy = simd::distance_sum(b, ny, b, ny, dim) / (double(ny) * ny);
        return double(nx) * ny / (nx + ny) * (2 * xy - xx - yy);
    };
    EnergyTest out;
    out.statistic = stat(pool);
    out.permutations = permutations;
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> idx(nx + ny);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> shuffled(pool.size());
    std::size_t as_large = 0;
    for (std::size_t p = 0; p < permutations; ++p) {
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t i = 0; i < idx.size(); ++i)
            std::copy_n(pool.begin() + idx[i] * dim, dim, shuffled.begin() + i * dim);
        if (stat(shuffled) >= out.statistic) ++as_large;
    }
    out.p_value = (as_large + 1.0) / (permutations + 1.0);
    return out;
}

double mean(const std::vector<double>& v) {
    if (v.empty()) throw DomainError("mean of an empty sample");
    return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double variance(const std::vector<double>& v) {
    if (v.size() < 2) throw DomainError("variance needs two values");
    const double m = mean(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s / (v.size() - 1);
}

} // namespace nibm::stats
