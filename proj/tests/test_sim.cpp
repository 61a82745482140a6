#include <doctest.h>

#include "nibm/error.hpp"
#include "nibm/free_conv.hpp"
#include "nibm/sim.hpp"
#include "nibm/stats.hpp"
#include "nibm/workers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

using namespace nibm;

namespace {

const DensitySpec quartic = DensitySpec::power(-1, 1, 0, 4);
const DensitySpec shifted = DensitySpec::power(-1, 1, 0.2, 4);

std::vector<double> pooled(const PathEnsemble& e, std::size_t k) {
    std::vector<double> out;
    for (std::size_t r = 0; r < e.replicas; ++r) {
        const auto v = e.at(r, k);
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

double normal_cdf(double x, double var) { return 0.5 * std::erfc(-x / std::sqrt(2 * var)); }

// CDF of the free-convolution density at time t, by the trapezoid rule over
// the image points of a fine pre-image grid.
struct EvolvedCdf {
    std::vector<double> xi, cum;
    EvolvedCdf(const DensitySpec& d, double t) {
        const BianeState st(Measure{d}, t, d.a() - 3.0, d.b() + 3.0, 4000);
        double acc = 0.0;
        const auto& g = st.grid();
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (i > 0) acc += 0.5 * (g[i].y + g[i - 1].y) / (std::numbers::pi * t) * (g[i].phi - g[i - 1].phi);
            xi.push_back(g[i].phi);
            cum.push_back(acc);
        }
        for (double& c : cum) c /= acc;
    }
    double operator()(double x) const {
        if (x <= xi.front()) return 0.0;
        if (x >= xi.back()) return 1.0;
        const auto it = std::upper_bound(xi.begin(), xi.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - xi.begin());
        const double w = (x - xi[i - 1]) / (xi[i] - xi[i - 1]);
        return cum[i - 1] + w * (cum[i] - cum[i - 1]);
    }
};

} // namespace

TEST_SUITE("sim") {

TEST_CASE("one particle is Brownian motion") {
    const auto e = sample_matrix(EmpiricalMeasure({0.0}), {0.5}, 10000, 1);
    const auto x = pooled(e, 0);
    const double var = stats::variance(x);
    // SE of the sample variance is sqrt(2 / (N - 1)) t.
    CHECK(std::abs(var - 0.5) < 3 * std::sqrt(2.0 / (x.size() - 1)) * 0.5);
}

TEST_CASE("Euler with one particle is Brownian motion") {
    const auto e = euler_sde(EmpiricalMeasure({0.0}), {0.5}, 1e-2, 10000, 2);
    const auto x = pooled(e, 0);
    CHECK(std::abs(stats::variance(x) - 0.5) < 3 * std::sqrt(2.0 / (x.size() - 1)) * 0.5);
}

TEST_CASE("paths stay ordered") {
    const auto e = sample_matrix(quantile_init(shifted, 30), {0.1, 0.2, 0.4}, 20, 5);
    for (std::size_t r = 0; r < e.replicas; ++r)
        for (std::size_t k = 0; k < e.times.size(); ++k) {
            const auto v = e.at(r, k);
            for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] - v[i - 1] > 1e-12);
        }
}

TEST_CASE("mean empirical law follows the free convolution") {
    const double t = 0.3;
    const auto e = sample_matrix(quantile_init(quartic, 100), {t}, 200, 7);
    const EvolvedCdf cdf(quartic, t);
    CHECK(stats::ks_distance(pooled(e, 0), cdf) <= 0.02);
}

TEST_CASE("nearly concentrated start spreads into a semicircle") {
    std::vector<double> atoms;
    for (int i = 0; i < 200; ++i) atoms.push_back(-1e-3 + 2e-3 * i / 199);
    const auto e = sample_matrix(EmpiricalMeasure(atoms), {1.0}, 500, 9);
    auto semicircle = [](double x) {
        if (x <= -2) return 0.0;
        if (x >= 2) return 1.0;
        return 0.5 + (x * std::sqrt(4 - x * x) / 4 + std::asin(x / 2)) / std::numbers::pi;
    };
    CHECK(stats::ks_distance(pooled(e, 0), semicircle) <= 0.02);
}

TEST_CASE("Monte Carlo error halves when replicas quadruple") {
    auto mean_ks = [](std::size_t replicas) {
        double s = 0;
        for (std::uint64_t seed = 0; seed < 8; ++seed) {
            const auto e = sample_matrix(EmpiricalMeasure({0.0}), {1.0}, replicas, 100 + seed);
            s += stats::ks_distance(pooled(e, 0), [](double x) { return normal_cdf(x, 1.0); });
        }
        return s / 8;
    };
    CHECK(mean_ks(250) / mean_ks(1000) == doctest::Approx(2.0).epsilon(0.3));
}

TEST_CASE("Euler agrees with the matrix sampler for two paths") {
    const EmpiricalMeasure init({-0.5, 0.5});
    const auto m = sample_matrix(init, {0.1}, 2000, 21);
    const auto e = euler_sde(init, {0.1}, 1e-4, 2000, 22);
    const auto test = stats::energy_test(pooled(m, 0), pooled(e, 0), 2, 99, 5);
    CHECK(test.p_value > 0.05);
    CHECK(e.collisions <= 0.01 * e.steps);
}

TEST_CASE("restarting from the first time gives the same joint law") {
    const EmpiricalMeasure init({-0.5, 0.5});
    const std::size_t reps = 500;
    const auto joint = sample_matrix(init, {0.1, 0.3}, reps, 31);
    const auto first = sample_matrix(init, {0.1}, reps, 32);
    std::vector<double> a, b;
    for (std::size_t r = 0; r < reps; ++r) {
        for (std::size_t k = 0; k < 2; ++k) {
            const auto v = joint.at(r, k);
            a.insert(a.end(), v.begin(), v.end());
        }
        const auto v1 = first.at(r, 0);
        const auto next = sample_matrix(EmpiricalMeasure({v1[0], v1[1]}), {0.2}, 1, 1000 + r);
        b.insert(b.end(), v1.begin(), v1.end());
        const auto v2 = next.at(0, 0);
        b.insert(b.end(), v2.begin(), v2.end());
    }
    CHECK(stats::energy_test(a, b, 4, 99, 6).p_value > 0.05);
}

TEST_CASE("noiseless Euler follows the repulsion ODE") {
    EulerOptions opt;
    opt.noise = false;
    const double g0 = 1.0;
    const auto e = euler_sde(EmpiricalMeasure({-g0 / 2, g0 / 2}), {0.25, 1.0}, 1e-5, 1, 0, opt);
    for (std::size_t k = 0; k < 2; ++k) {
        const auto v = e.at(0, k);
        CHECK(v[1] - v[0] == doctest::Approx(std::sqrt(g0 * g0 + 2 * e.times[k])).epsilon(1e-4));
        CHECK(v[0] + v[1] == doctest::Approx(0.0).scale(1e-12));
    }
}

TEST_CASE("Euler step must resolve the initial spacing") {
    CHECK_THROWS_AS(euler_sde(EmpiricalMeasure({-0.05, 0.05}), {0.1}, 1e-5, 2, 0), DomainError);
    CHECK_NOTHROW(euler_sde(EmpiricalMeasure({-0.05, 0.05}), {0.01}, 1e-6, 2, 0));
}

TEST_CASE("observation times are validated") {
    const EmpiricalMeasure init({0.0, 1.0});
    CHECK_THROWS_AS(sample_matrix(init, {}, 1, 0), DomainError);
    CHECK_THROWS_AS(sample_matrix(init, {0.0}, 1, 0), DomainError);
    CHECK_THROWS_AS(sample_matrix(init, {0.2, 0.1}, 1, 0), DomainError);
    CHECK_THROWS_AS(sample_matrix(init, {0.1}, 0, 0), DomainError);
}

TEST_CASE("seeds reproduce and replicas are independent of the batch") {
    const auto init = quantile_init(shifted, 20);
    const auto a = sample_matrix(init, {0.2, 0.5}, 6, 77);
    const auto b = sample_matrix(init, {0.2, 0.5}, 12, 77);
    for (std::size_t r = 0; r < 6; ++r)
        for (std::size_t k = 0; k < 2; ++k) {
            const auto x = a.at(r, k), y = b.at(r, k);
            CHECK(std::equal(x.begin(), x.end(), y.begin()));
        }
    const auto c = sample_matrix(init, {0.2, 0.5}, 6, 78);
    CHECK(c.data != a.data);
}

TEST_CASE("results do not depend on the worker count") {
    const auto init = quantile_init(shifted, 20);
    set_workers(1);
    const auto one = sample_matrix(init, {0.3}, 16, 5);
    const EmpiricalMeasure spaced({-1.0, -0.5, 0.0, 0.5, 1.0});
    const auto eone = euler_sde(spaced, {0.02}, 5e-6, 8, 5);
    set_workers(4);
    const auto four = sample_matrix(init, {0.3}, 16, 5);
    const auto efour = euler_sde(spaced, {0.02}, 5e-6, 8, 5);
    set_workers(0);
    CHECK(one.data == four.data);
    CHECK(eone.data == efour.data);
    CHECK(eone.collisions == efour.collisions);
}

TEST_CASE("gap frequency and the largest particle below the window") {
    const auto f = classify(shifted);
    const std::size_t n = 50;
    const std::vector<double> taus{0.0, 0.5};
    const auto e = sample_matrix(quantile_init(shifted, n), frame_times(f, n, taus), 40, 3);

    const auto empty = meso_gap_frequency(e, f, 0.05, 0.05, taus);
    CHECK(empty.value == 1.0);
    const auto p = meso_gap_frequency(e, f, 0.05, 0.02, taus);
    CHECK(p.total == 40);
    CHECK(p.lo <= p.value);
    CHECK(p.value <= p.hi);
    CHECK_THROWS_AS(meso_gap_frequency(e, f, 0.05, 0.06, taus), DomainError);
    CHECK_THROWS_AS(meso_gap_frequency(e, f, 0.05, 0.02, {0.25}), DomainError);

    const auto lo = xi_statistic(e, f, 0.05, 0.0), hi = xi_statistic(e, f, 0.15, 0.0);
    REQUIRE(lo.missing == 0);
    REQUIRE(hi.missing == 0);
    REQUIRE(lo.values.size() == hi.values.size());
    for (std::size_t r = 0; r < lo.values.size(); ++r) CHECK(hi.values[r] >= lo.values[r]);
    // Values sit below the cut c n^{2/3} n^{eps - 2/3}.
    for (double v : lo.values) CHECK(v <= f.scale * std::pow(double(n), 0.05) + 1e-9);
    CHECK_THROWS_AS(xi_statistic(e, classify(quartic), 0.05, 0.0), DomainError);
}

TEST_CASE("ensemble dumps round trip") {
    const auto e = euler_sde(EmpiricalMeasure({-0.5, 0.0, 0.5}), {0.01, 0.02}, 1e-6, 3, 4);
    std::stringstream ss;
    write_ensemble(ss, e);
    const auto back = read_ensemble(ss);
    CHECK(back.n == e.n);
    CHECK(back.replicas == e.replicas);
    CHECK(back.times == e.times);
    CHECK(back.seed == e.seed);
    CHECK(back.sampler == Sampler::Euler);
    CHECK(back.steps == e.steps);
    CHECK(back.collisions == e.collisions);
    CHECK(back.data == e.data);

    std::stringstream bad("NOTADUMP");
    CHECK_THROWS_AS(read_ensemble(bad), IoError);
    std::stringstream full;
    write_ensemble(full, e);
    std::stringstream cut(full.str().substr(0, full.str().size() - 4));
    CHECK_THROWS_AS(read_ensemble(cut), IoError);

    std::stringstream csv;
    write_ensemble_csv(csv, e);
    std::string header;
    std::getline(csv, header);
    CHECK(header == "replica,time_index,t,particle,x");
    std::size_t rows = 0;
    for (std::string line; std::getline(csv, line);) ++rows;
    CHECK(rows == e.data.size());
}

TEST_CASE("replica seeds differ") {
    CHECK(replica_seed(1, 0) != replica_seed(1, 1));
    CHECK(replica_seed(1, 0) != replica_seed(2, 0));
    CHECK(replica_seed(1, 3) == replica_seed(1, 3));
}

}
