#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace nibm::stats {

// Wilson score interval for a binomial proportion (z = 1.96 by default).
struct Proportion {
    std::size_t hits = 0, total = 0;
    double value = 0, lo = 0, hi = 1;
};
Proportion wilson(std::size_t hits, std::size_t total, double z = 1.959963984540054);

// sup_x |F_emp(x) - cdf(x)| for a sample (sorted internally).
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);

// Fraction of values <= a.
double empirical_cdf(const std::vector<double>& sample, double a);

// Two-sample energy test on points in R^dim (row-major), permutation p-value.
struct EnergyTest {
    double statistic = 0; // n m / (n + m) * energy distance
    double p_value = 1;
    std::size_t permutations = 0;
};
EnergyTest energy_test(const std::vector<double>& x, const std::vector<double>& y, std::size_t dim,
                       std::size_t permutations, std::uint64_t seed);

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v); // unbiased

} // namespace nibm::stats
