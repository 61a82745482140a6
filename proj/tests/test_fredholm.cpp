#include <doctest.h>

#include "nibm/error.hpp"
#include "nibm/fredholm.hpp"
#include "nibm/kernels_finite.hpp"

#include <cmath>
#include <limits>
#include <numbers>

using namespace nibm;

namespace {

const double inf = std::numeric_limits<double>::infinity();

FredholmProblem one_window(double lo, double hi, std::size_t q = 64) {
    FredholmProblem p;
    p.taus = {0.0};
    p.lower = {lo};
    p.upper = {hi};
    p.q = q;
    return p;
}

} // namespace

TEST_SUITE("fredholm") {

TEST_CASE("empty window gives one") {
    CHECK(fredholm_det(one_window(40.0, inf)) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(tw2_cdf(6.0) >= 1.0 - 1e-8);
}

TEST_CASE("GUE Tracy-Widom values") {
    // Frozen from q = 64 after checking against q = 128.
    CHECK(tw2_cdf(0.0) == doctest::Approx(0.969372828355).epsilon(1e-10));
    CHECK(tw2_cdf(-2.0) == doctest::Approx(0.413224142505).epsilon(1e-10));
    for (double a : {-4.0, -2.0, 0.0, 2.0})
        CHECK(std::abs(tw2_cdf(a, 64) - tw2_cdf(a, 128)) < 1e-8);
    CHECK(tw2_cdf(-6.0) <= 1e-3);
    CHECK(tw2_cdf(-6.0) >= 0.0);
}

TEST_CASE("Tracy-Widom mean") {
    const double m = tw2_mean();
    CHECK(m == doctest::Approx(-1.771).epsilon(1e-3));
    // Doubled Nystrom order and doubled outer nodes.
    CHECK(std::abs(m - tw2_mean(128, 16)) < 1e-7);
}

TEST_CASE("CDF is monotone and bounded") {
    double prev = -1.0;
    for (double a = -8.0; a <= 4.0; a += 0.25) {
        const double f = tw2_cdf(a);
        CHECK(f >= prev);
        CHECK(f >= -1e-10);
        CHECK(f <= 1.0 + 1e-10);
        prev = f;
    }
}

TEST_CASE("single time reduces to the CDF") {
    CHECK(airy2_fdd({0.0}, {-1.3}) == tw2_cdf(-1.3));
    CHECK(airy2_fdd({2.5}, {-1.3}) == tw2_cdf(-1.3));
}

TEST_CASE("two-time law is bounded by its marginals") {
    for (double a : {-3.0, -1.5, 0.0})
        for (double b : {-2.0, -0.5}) {
            const double j = airy2_fdd({0.0, 1.0}, {a, b});
            const double fa = tw2_cdf(a), fb = tw2_cdf(b);
            CHECK(j <= std::min(fa, fb) + 1e-10);
            CHECK(j >= fa + fb - 1.0 - 1e-10);
            // positive association
            CHECK(j >= fa * fb);
        }
}

TEST_CASE("monotone in each threshold") {
    double prev = -1.0;
    for (double b = -3.0; b <= 1.0; b += 0.5) {
        const double j = airy2_fdd({0.0, 0.7, 1.5}, {-1.0, b, -0.5});
        CHECK(j >= prev);
        prev = j;
    }
}

TEST_CASE("stationarity") {
    CHECK(std::abs(airy2_fdd({0.0, 1.0}, {-1.0, -0.5}) - airy2_fdd({5.0, 6.0}, {-1.0, -0.5})) <= 1e-8);
}

TEST_CASE("self-convergence in the node count") {
    CHECK(std::abs(airy2_fdd({0.0, 1.0}, {-1.0, -0.5}, 64) - airy2_fdd({0.0, 1.0}, {-1.0, -0.5}, 128)) < 1e-7);
    CHECK(std::abs(airy2_fdd({0.0, 0.5, 2.0}, {-2.0, -1.0, 0.0}, 64) -
                   airy2_fdd({0.0, 0.5, 2.0}, {-2.0, -1.0, 0.0}, 128)) < 1e-7);
}

TEST_CASE("decorrelation at large time gaps follows tau^-2") {
    // The covariance of the Airy2 process decays like tau^-2, so the joint
    // law approaches the product only at that rate.
    const double a = -1.0, f = tw2_cdf(a);
    auto excess = [&](double gap) {
        FredholmProblem p;
        p.taus = {0.0, gap};
        p.lower = {a, a};
        p.upper = {inf, inf};
        return fredholm_det(p) - f * f;
    };
    const double e5 = excess(5.0), e10 = excess(10.0), e20 = excess(20.0);
    CHECK(e5 > e10);
    CHECK(e10 > e20);
    CHECK(e20 > 0.0);
    CHECK(e10 / e20 == doctest::Approx(4.0).epsilon(0.05));
    CHECK(e5 / e10 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("tiny time gap") {
    // Locally the process is Brownian with diffusion 2, so
    // F2(a) - P(both <= a) ~ f2(a) E[max(0, B_tau)] = f2(a) sqrt(tau / pi).
    const double a = -2.0, tau = 0.01;
    const double f = tw2_cdf(a, 256);
    const double j = airy2_fdd({0.0, tau}, {a, a}, 256);
    CHECK(j <= f);
    const double h = 1e-3;
    const double dens = (tw2_cdf(a + h, 256) - tw2_cdf(a - h, 256)) / (2 * h);
    CHECK(f - j == doctest::Approx(dens * std::sqrt(tau / std::numbers::pi)).epsilon(0.02));
}

TEST_CASE("conjugating the kernel leaves the determinant unchanged") {
    auto p = one_window(-2.0, 6.0);
    const double base = fredholm_det(p);
    const auto airy = KernelSource::limit_airy();
    p.source = KernelSource::custom([&](std::size_t a, std::size_t b, const std::vector<double>& us,
                                        const std::vector<double>& vs) {
        Eigen::MatrixXd m = airy.block(p.taus, a, b, us, vs);
        for (std::size_t i = 0; i < us.size(); ++i)
            for (std::size_t k = 0; k < vs.size(); ++k) m(i, k) *= std::exp(-us[i] + vs[k]);
        return m;
    });
    CHECK(std::abs(fredholm_det(p) - base) <= 1e-10);
}

TEST_CASE("perturbation stability") {
    auto p = one_window(-2.0, 6.0);
    const double base = fredholm_det(p);
    const auto airy = KernelSource::limit_airy();
    const double delta = 1e-6;
    p.source = KernelSource::custom([&](std::size_t a, std::size_t b, const std::vector<double>& us,
                                        const std::vector<double>& vs) {
        Eigen::MatrixXd m = airy.block(p.taus, a, b, us, vs);
        m.array() += delta;
        return m;
    });
    // Measured once: C = 4.7354 for this window.
    CHECK(std::abs(fredholm_det(p) - base) / delta == doctest::Approx(4.7354).epsilon(1e-3));
}

TEST_CASE("interval rule on a half line") {
    const auto r = interval_rule(1.0, inf, 64);
    double mass = 0.0;
    for (std::size_t i = 0; i < r.u.size(); ++i) {
        CHECK(r.u[i] > 1.0);
        mass += r.w[i] * std::exp(-(r.u[i] - 1.0));
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("finite-n gap probability") {
    const auto d = DensitySpec::power(-1, 1, 0.2, 4);
    const auto k = std::make_shared<RescaledKernel>(quantile_init(d, 50), classify(d));
    const double v = finite_gap_probability(k, {0.0}, {0.0});
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    // Window (a, c n^eps] shrinks to nothing as a approaches its end.
    const double top = classify(d).scale * std::pow(50.0, classify(d).eps);
    CHECK(finite_gap_probability(k, {0.0}, {top - 1e-6}) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(finite_gap_probability(k, {0.0}, {top - 0.5}) > v);
}

TEST_CASE("argument checks") {
    CHECK_THROWS_AS(fredholm_det(one_window(1.0, 0.0)), DomainError);
    CHECK_THROWS_AS(fredholm_det(one_window(0.0, inf, 4)), DomainError);
    CHECK_THROWS_AS(airy2_fdd({0.0, 5.0}, {0.0, 0.0}), DomainError);
    CHECK_THROWS_AS(airy2_fdd({1.0, 0.0}, {0.0, 0.0}), DomainError);
    CHECK_THROWS_AS(tw2_cdf(11.0), DomainError);
    FredholmProblem bad = one_window(0.0, inf);
    bad.source = KernelSource::custom([](std::size_t, std::size_t, const std::vector<double>&,
                                         const std::vector<double>&) { return Eigen::MatrixXd(2, 2); });
    CHECK_THROWS_AS(fredholm_det(bad), DomainError);
    bad.source = KernelSource::custom([](std::size_t, std::size_t, const std::vector<double>& u,
                                         const std::vector<double>& v) {
        return Eigen::MatrixXd::Constant(u.size(), v.size(), std::nan(""));
    });
    CHECK_THROWS_AS(fredholm_det(bad), ConvergenceError);
}

}
