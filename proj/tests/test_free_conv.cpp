#include <doctest.h>

#include "nibm/error.hpp"
#include "nibm/free_conv.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>

using namespace nibm;

namespace {
const DensitySpec quartic = DensitySpec::power(-1, 1, 0, 4);
const DensitySpec shifted = DensitySpec::power(-1, 1, 0.2, 4);
const Measure delta{EmpiricalMeasure({0.0})};
// Closed forms for c (x - 0.2)^4 on [-1, 1], c = 1 / 0.5632.
const double shifted_c = 1.0 / 0.5632;
const double shifted_tcr = 3.0 / (2.24 * shifted_c);
const double shifted_G0 = 0.416 * shifted_c;
const double shifted_G2 = 0.8 * shifted_c;
const double shifted_c2 = std::cbrt(2.0) / (std::cbrt(shifted_G2) * shifted_tcr);
} // namespace

TEST_SUITE("free_conv") {

TEST_CASE("Biane height") {
    CHECK(biane_y(delta, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(biane_y(delta, 1.0, 0.5) == doctest::Approx(std::sqrt(0.75)).epsilon(1e-12));
    CHECK(biane_y(quartic, 0.3, 0.0) == 0.0);
    CHECK_THROWS_AS(biane_y(delta, 0.0, 0.0), DomainError);
}

TEST_CASE("evolved points") {
    CHECK(evolve_point(delta, 1.0, 0.0) == doctest::Approx(0.0));
    CHECK(evolve_point(delta, 1.0, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
    for (double t : {0.1, 0.3, 0.6}) CHECK(std::abs(evolve_point(quartic, t, 0.0)) < 1e-12);
}

TEST_CASE("point mass evolves into the semicircle") {
    for (double t : {0.25, 1.0}) {
        const double edge = 2.0 * std::sqrt(t);
        double worst = 0;
        for (int i = 0; i < 200; ++i) {
            const double xi = -edge + 2.0 * edge * (i + 0.5) / 200.0;
            const double want = std::sqrt(4.0 * t - xi * xi) / (2.0 * std::numbers::pi * t);
            worst = std::max(worst, std::abs(density_at(delta, t, xi) - want));
        }
        CHECK(worst <= 1e-8);
    }
    CHECK(density_at(delta, 1.0, 0.0) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-12));
    CHECK(density_at(delta, 1.0, 2.0) == doctest::Approx(0.0));
}

TEST_CASE("Phi is increasing and the density has unit mass") {
    const double t = 0.5;
    const BianeState st(shifted, t, -4, 4, 400);
    const auto& g = st.grid();
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i].phi > g[i - 1].phi);
    // Support edges by bisection on the height, then tanh-sinh, which copes
    // with the square-root ends.
    auto edge = [&](double inside, double outside) {
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (inside + outside);
            (biane_y(shifted, t, mid) > 0 ? inside : outside) = mid;
        }
        return evolve_point(shifted, t, inside);
    };
    const double lo = edge(0.0, -4.0), hi = edge(0.0, 4.0);
    boost::math::quadrature::tanh_sinh<double> ts;
    // Split at the interior zero x*(t), where psi is not smooth.
    const double mid = 0.2 + t * shifted_G0;
    auto psi = [&](double xi) { return st.density(xi); };
    const double mass = ts.integrate(psi, lo, mid, 1e-10) + ts.integrate(psi, mid, hi, 1e-10);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_THROWS_AS(st.density(1e3), RangeError);
}

TEST_CASE("critical times") {
    CHECK(critical_time(quartic, 0.0) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(critical_time(shifted, 0.2) == doctest::Approx(shifted_tcr).epsilon(1e-10));
    CHECK(critical_time(EmpiricalMeasure({-0.5, 0.5}), 0.0) == doctest::Approx(0.25));
    CHECK(critical_time(DensitySpec::power(-1, 1, 0, 1), 0.0) == 0.0);
}

TEST_CASE("the zero at x*(t) persists up to t_cr") {
    const auto f = classify(shifted);
    for (double frac : {0.2, 0.4, 0.6, 0.8, 1.0}) {
        const double t = frac * f.t_cr;
        CHECK(density_at(shifted, t, critical_path(f, t).x) < 1e-6);
    }
    CHECK(density_at(shifted, 1.1 * f.t_cr, critical_path(f, 1.1 * f.t_cr).x) > 1e-3);
}

TEST_CASE("critical path") {
    const auto f = classify(shifted);
    CHECK(critical_path(f, f.t_cr).x == doctest::Approx(0.2 + shifted_tcr * shifted_G0).epsilon(1e-10));
    CHECK(std::abs(critical_path(f, f.t_cr).x - 0.7571) < 5e-4);
    CHECK_FALSE(critical_path(f, f.t_cr).linearized);
    CHECK(critical_path(f, 1.2 * f.t_cr).linearized);
    CHECK(critical_path(f, 0.0).x == 0.2);
    CHECK(critical_path(classify(quartic), 0.4).x == 0.0);
}

TEST_CASE("classification") {
    const auto p = classify(quartic);
    CHECK(p.regime == Regime::Pearcey);
    CHECK(p.t_cr == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(p.t_cr == doctest::Approx(-1.0 / p.G1).epsilon(1e-12));
    CHECK(p.scale == doctest::Approx(std::pow(6.0 / 30.0, 0.25) / 0.6).epsilon(1e-9));

    const auto a = classify(shifted);
    CHECK(a.regime == Regime::AiryRight);
    CHECK(a.scale == doctest::Approx(shifted_c2).epsilon(1e-10));

    const auto l = classify(shifted.reflected(0.0));
    CHECK(l.regime == Regime::AiryLeft);
    CHECK(l.orientation() == -1);
    CHECK(l.scale == doctest::Approx(a.scale).epsilon(1e-12));

    CHECK_THROWS_AS(classify(DensitySpec::power(-1, 1, 0, 3)), DomainError);
    CHECK_THROWS_AS(classify(DensitySpec::power(-1, 1, 0, 2)), DomainError);
}

TEST_CASE("frame maps") {
    const auto p = classify(quartic);
    const auto a = classify(shifted);
    CHECK(frame_maps(p, 100, 0).t == p.t_cr);
    CHECK(frame_maps(a, 100, 0).x == doctest::Approx(critical_path(a, a.t_cr).x));
    CHECK(frame_maps(p, 100, 1).t == doctest::Approx(0.6 + 1.0 / (p.scale * p.scale * 10)).epsilon(1e-12));
    CHECK(p.scale == doctest::Approx(1.114567).epsilon(1e-6));
    CHECK(frame_maps(a, 1000, -2).t == doctest::Approx(shifted_tcr - 4.0 / (shifted_c2 * shifted_c2 * 10)).epsilon(1e-10));
    for (double tau : {-3.0, -1.0, -0.1, 0.0}) {
        const auto fp = frame_maps(a, 200, tau);
        CHECK(fp.x == critical_path(a, fp.t).x);
    }
    CHECK_THROWS_AS(frame_maps(a, 2, -100), DomainError);
}

TEST_CASE("local exponents at the critical point") {
    const auto p = classify(quartic);
    const auto fp = local_exponent(quartic, p);
    CHECK(fp.alpha == doctest::Approx(1.0 / 3.0).epsilon(0.05 * 3));
    // Carrying H(x* + w) - x*(t_cr) = t G3 w^3 / 6 through gives
    // sqrt(3) (6 / -G3)^{1/3} / (2 pi t^{4/3}).
    const double derived = std::sqrt(3.0) * std::cbrt(6.0 / 30.0) / (2.0 * std::numbers::pi * std::pow(0.6, 4.0 / 3.0));
    CHECK(fp.prefactor == doctest::Approx(derived).epsilon(0.05));

    const auto a = classify(shifted);
    const auto fa = local_exponent(shifted, a);
    CHECK(std::abs(fa.alpha - 0.5) < 0.05);
    const double sq = std::sqrt(2.0) / (std::numbers::pi * std::pow(a.t_cr, 1.5) * std::sqrt(a.G2));
    CHECK(fa.prefactor == doctest::Approx(sq).epsilon(0.05));
}

TEST_CASE("square-root edge of the semicircle") {
    const auto fit = fit_local_exponent(delta, 1.0, 2.0, -1, 1e-3, 1e-7, 0.5);
    CHECK(std::abs(fit.alpha - 0.5) < 0.05);
}

} // TEST_SUITE
