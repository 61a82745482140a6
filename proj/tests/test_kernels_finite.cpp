#include <doctest.h>

#include "nibm/error.hpp"
#include "nibm/kernels_finite.hpp"
#include "nibm/kernels_limit.hpp"
#include "nibm/quadrature.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

using namespace nibm;

namespace {

const DensitySpec quartic = DensitySpec::power(-1, 1, 0, 4);
const DensitySpec shifted = DensitySpec::power(-1, 1, 0.2, 4);

EmpiricalMeasure spread(std::size_t n) {
    std::vector<double> a;
    for (std::size_t i = 0; i < n; ++i) a.push_back(n == 1 ? 0.0 : -1.0 + 2.0 * i / (n - 1));
    return EmpiricalMeasure(a);
}

// Two paths from a1 < a2 with noise variance 1/n per unit time, n = 2:
// ordered joint density at time t by Karlin-McGregor and the Vandermonde
// h-transform.
double two_path_density(double a1, double a2, double t, double x1, double x2) {
    const double var = t / 2.0;
    const double det = heat_kernel(var, x1 - a1) * heat_kernel(var, x2 - a2) -
                       heat_kernel(var, x2 - a1) * heat_kernel(var, x1 - a2);
    return (x2 - x1) / (a2 - a1) * det;
}

} // namespace

TEST_SUITE("kernels_finite") {

TEST_CASE("one path is a Gaussian") {
    const FiniteKernel k(EmpiricalMeasure({0.0}));
    CHECK(k(1.0, 0.0, 1.0, 0.0) == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi)).epsilon(1e-12));
    // variance t / n = 0.5
    CHECK(k(0.5, 0.7, 0.5, 0.7) == doctest::Approx(heat_kernel(0.5, 0.7)).epsilon(1e-12));
}

TEST_CASE("residue table matches direct products and ignores input order") {
    const auto mn = quantile_init(shifted, 60);
    const ResidueTable tab(mn);
    CHECK(tab.verify(mn) < 1e-12);
    auto atoms = mn.atoms();
    std::shuffle(atoms.begin(), atoms.end(), std::mt19937(3));
    const FiniteKernel a(mn), b{EmpiricalMeasure(atoms)};
    CHECK(a(0.4, 0.1, 0.5, -0.2) == b(0.4, 0.1, 0.5, -0.2));
}

TEST_CASE("reflection symmetry for a symmetric start") {
    const FiniteKernel k(EmpiricalMeasure({-0.9, -0.5, -0.2, 0.2, 0.5, 0.9}));
    for (double x : {0.05, 0.3, 0.8})
        CHECK(k(0.3, x, 0.3, x) == doctest::Approx(k(0.3, -x, 0.3, -x)).epsilon(1e-10));
    CHECK(k(0.2, 0.1, 0.4, 0.5) == doctest::Approx(k(0.2, -0.1, 0.4, -0.5)).epsilon(1e-10));
}

TEST_CASE("one-point density integrates to n") {
    for (std::size_t n : {2u, 4u, 8u}) {
        const FiniteKernel k(spread(n));
        const double t = 0.3;
        const double mass = quad::adaptive_pieces([&](double x) { return k(t, x, t, x); },
                                                  {-4.0, -1.0, 0.0, 1.0, 4.0}, 1e-10);
        CHECK(mass == doctest::Approx(static_cast<double>(n)).epsilon(1e-8));
    }
}

TEST_CASE("density is positive") {
    const FiniteKernel k(quantile_init(shifted, 30));
    for (double x = -1.5; x <= 1.5; x += 0.05) CHECK(k(0.3, x, 0.3, x) > 0.0);
}

TEST_CASE("two paths against Karlin-McGregor") {
    const double a1 = -0.4, a2 = 0.5, t = 0.35;
    const FiniteKernel k(EmpiricalMeasure({a1, a2}));
    for (double x : {-0.9, -0.2, 0.1, 0.6}) {
        for (double y : {-0.5, 0.3, 1.1}) {
            const double r2 = k(t, x, t, x) * k(t, y, t, y) - k(t, x, t, y) * k(t, y, t, x);
            CHECK(r2 == doctest::Approx(two_path_density(a1, a2, t, std::min(x, y), std::max(x, y)))
                            .epsilon(1e-6)
                            .scale(1e-6));
        }
        const double r1 = quad::adaptive_pieces(
            [&](double y) { return two_path_density(a1, a2, t, std::min(x, y), std::max(x, y)); },
            {-6.0, x, 6.0}, 1e-11);
        CHECK(k(t, x, t, x) == doctest::Approx(r1).epsilon(1e-6));
    }
}

TEST_CASE("residue sum agrees with contour quadrature") {
    const EmpiricalMeasure mn({-0.8, -0.1, 0.35, 0.9});
    struct Q {
        double s, x, t, y;
    };
    for (const Q q : {Q{0.3, 0.1, 0.3, 0.1}, Q{0.2, -0.4, 0.5, 0.3}, Q{0.6, 0.2, 0.25, -0.1}}) {
        const double exact = kernel_exact(mn, q.s, q.x, q.t, q.y);
        ContourSpec spec;
        spec.panels = 96;
        spec.rel_tol = 1e-8;
        const double quadv = kernel_quadrature(mn, q.s, q.x, q.t, q.y, spec);
        CHECK(exact == doctest::Approx(quadv).epsilon(1e-8).scale(1e-8));
    }
}

TEST_CASE("heat part in critical coordinates is the limit heat part") {
    const auto a = classify(shifted);
    const RescaledKernel ra(quantile_init(shifted, 200), a);
    const auto p = classify(quartic);
    const RescaledKernel rp(quantile_init(quartic, 200), p);
    for (double d : {0.1, 0.5, 1.3})
        for (double u : {-1.0, 0.4}) {
            CHECK(ra.heat(d, 0.0, u, 0.3) == doctest::Approx(airy_heat(d, 0.0, u, 0.3)).epsilon(1e-14));
            CHECK(rp.heat(d, 0.0, u, 0.3) == doctest::Approx(pearcey_heat(d, 0.0, u, 0.3)).epsilon(1e-14));
        }
    CHECK(ra.heat(0.0, 0.5, 0.1, 0.2) == 0.0);
}

TEST_CASE("gauge leaves determinants unchanged") {
    const auto mn = quantile_init(shifted, 20);
    // Extended: the later-time rows cancel ~10 digits, leaving compensated
    // sums with only ~6.
    const FiniteKernel bare(mn, Precision::Extended), gauged(mn, Precision::Extended, 0.7);
    CHECK(gauged.gauge() == 0.7);
    const std::vector<double> ts{0.3, 0.3, 0.45}, xs{0.1, 0.25, -0.3};
    for (std::size_t m : {2u, 3u}) {
        Eigen::MatrixXd a(m, m), b(m, m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                a(i, j) = bare(ts[i], xs[i], ts[j], xs[j]);
                b(i, j) = gauged(ts[i], xs[i], ts[j], xs[j]);
            }
        CHECK(b.determinant() == doctest::Approx(a.determinant()).epsilon(1e-9));
    }
}

TEST_CASE("plain double summation refuses heavy cancellation") {
    const auto mn = quantile_init(shifted, 200);
    const auto f = classify(shifted);
    const auto pt = frame_maps(f, 200, 0.0);
    CHECK_THROWS_AS(kernel_exact(mn, pt.t, pt.x, pt.t, pt.x, Precision::Double), PrecisionError);
    KernelDiagnostics d;
    const double v = kernel_exact(mn, pt.t, pt.x, pt.t, pt.x, Precision::Auto, &d);
    CHECK(std::isfinite(v));
    CHECK(d.used != Precision::Double);
    CHECK(v == doctest::Approx(kernel_exact(mn, pt.t, pt.x, pt.t, pt.x, Precision::Extended)).epsilon(1e-10));
}

TEST_CASE("precision names round trip") {
    for (auto p : {Precision::Double, Precision::Compensated, Precision::Extended, Precision::Auto})
        CHECK(parse_precision(precision_name(p)) == p);
    CHECK_THROWS_AS(parse_precision("quad"), ConfigError);
}

TEST_CASE("saddle point for two symmetric atoms") {
    const EmpiricalMeasure mn({-0.3, 0.3});
    const auto z = saddle_points(mn, 0.5, 0.0);
    CHECK(z.real() == doctest::Approx(0.0).scale(1e-10));
    CHECK(z.imag() == doctest::Approx(std::sqrt(0.5 - 0.09)).epsilon(1e-9));
}

TEST_CASE("symmetric start has an imaginary saddle at the centre") {
    auto atoms = quantile_init(quartic, 100).atoms();
    std::vector<double> mirrored;
    for (double a : atoms)
        if (a > 0.0) {
            mirrored.push_back(a);
            mirrored.push_back(-a);
        }
    const EmpiricalMeasure mn(mirrored);
    const auto f = classify(quartic);
    // The central gap keeps the discrete height at zero until somewhat past t_cr.
    const auto z = saddle_points(mn, 2.0 * f.t_cr, 0.0);
    CHECK(std::abs(z.real()) < 1e-10);
    CHECK(z.imag() > 0.0);
}

TEST_CASE("saddle stays within n^{-1/3 + eps/2} of the critical point") {
    // Not monotone in n: where x* falls inside the central atom gap moves
    // with frac(n F(x*)).
    const auto f = classify(shifted);
    for (std::size_t n : {50u, 100u, 200u, 400u}) {
        const auto pt = frame_maps(f, n, 0.0);
        const auto z = saddle_points(quantile_init(shifted, n), pt.t, pt.x);
        CHECK(std::abs(z - std::complex<double>(f.x_star, 0.0)) < std::pow(n, -1.0 / 3 + f.eps / 2));
    }
}

TEST_CASE("local quadratic expansion of H near the critical point") {
    // sup over a disk of radius n^{-1/3+eps} of |H(z) - x_n - t G2 w^2 / 2|;
    // should scale like n^{-2/3+eps}.
    const auto f = classify(shifted);
    auto residual = [&](std::size_t n) {
        const auto mn = quantile_init(shifted, n);
        const auto pt = frame_maps(f, n, 0.0);
        const double r = std::pow(n, -1.0 / 3 + f.eps);
        double worst = 0.0;
        for (int i = 1; i <= 8; ++i)
            for (int k = 0; k < 32; ++k) {
                const auto w = r * i / 8.0 * std::polar(1.0, 2 * std::numbers::pi * k / 32);
                const auto z = f.x_star + w;
                if (std::any_of(mn.atoms().begin(), mn.atoms().end(),
                                [&](double a) { return std::abs(z - a) < 1e-9; }))
                    continue;
                const auto h = z + pt.t * stieltjes(mn, z);
                worst = std::max(worst, std::abs(h - pt.x - pt.t * f.G2 / 2 * w * w));
            }
        return worst;
    };
    const double e50 = residual(50), e400 = residual(400), e3200 = residual(3200);
    const double want = std::pow(8.0, 2.0 / 3 - f.eps);
    for (double ratio : {e50 / e400, e400 / e3200}) {
        CHECK(ratio > want / 2);
        CHECK(ratio < want * 2);
    }
}

TEST_CASE("rescaled diagonal near the Airy limit at n = 200") {
    const auto f = classify(shifted);
    const RescaledKernel k(quantile_init(shifted, 200), f);
    // Finite-n error here is about 0.08 and does not shrink monotonically.
    CHECK(std::abs(k(0.0, 0.0, 0.0, 0.0) - airy_kernel(0.0, 0.0, 0.0, 0.0)) < 0.1);
}

TEST_CASE("argument checks") {
    const FiniteKernel k(spread(3));
    CHECK_THROWS_AS(k(0.0, 0.1, 0.2, 0.1), DomainError);
    CHECK_THROWS_AS(saddle_points(spread(3), 0.0, 0.0), DomainError);
}

}
