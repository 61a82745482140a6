// Acceptance run: one PASS/FAIL line per criterion, each with the measured
// numbers and wall time. Exit status is nonzero if any criterion fails.

#include "nibm/converge.hpp"
#include "nibm/fredholm.hpp"
#include "nibm/free_conv.hpp"
#include "nibm/kernels_finite.hpp"
#include "nibm/kernels_limit.hpp"
#include "nibm/measures.hpp"
#include "nibm/sim.hpp"
#include "nibm/stats.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace nibm;

namespace {

const DensitySpec quartic = DensitySpec::power(-1, 1, 0, 4);
const DensitySpec shifted = DensitySpec::power(-1, 1, 0.2, 4);

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Criteria 10 and 11 read the same ensemble.
struct Shared {
    std::optional<PathEnsemble> ens;
    CriticalFrame frame;
};
Shared shared;

const PathEnsemble& shifted_ensemble() {
    if (!shared.ens) {
        shared.frame = classify(shifted);
        const std::size_t n = 200;
        shared.ens = sample_matrix(quantile_init(shifted, n), frame_times(shared.frame, n, {0.0, 1.0}), 400, 20261016);
    }
    return *shared.ens;
}

Outcome critical_data() {
    const auto p = classify(quartic);
    const auto a = classify(shifted);
    const double xp = critical_path(p, p.t_cr).x, xa = critical_path(a, a.t_cr).x;
    const bool ok = std::abs(p.t_cr - 0.6) <= 1e-6 && std::abs(xp) <= 1e-6 && std::abs(a.t_cr - 0.7543) <= 5e-4 &&
                    std::abs(xa - 0.7571) <= 5e-4;
    return {ok, fmt("quartic t_cr=%.9f x*=%.2e; shifted t_cr=%.6f x*=%.6f", p.t_cr, xp, a.t_cr, xa)};
}

Outcome semicircle() {
    const Measure delta{EmpiricalMeasure({0.0})};
    double worst = 0;
    for (int i = 0; i < 200; ++i) {
        const double x = -2.0 + 4.0 * (i + 0.5) / 200;
        const double want = std::sqrt(4.0 - x * x) / (2.0 * std::numbers::pi);
        worst = std::max(worst, std::abs(density_at(delta, 1.0, x) - want));
    }
    return {worst <= 1e-8, fmt("sup error %.2e on 200 points", worst)};
}

Outcome local_exponents() {
    const auto p = classify(quartic);
    const auto fp = local_exponent(quartic, p);
    const auto a = classify(shifted);
    const auto fa = local_exponent(shifted, a);
    // The prefactor formula exactly as stated, from the computed t_cr and G3.
    const double stated =
        std::sqrt(3.0) / (2.0 * std::numbers::pi * std::pow(p.t_cr, 4.0 / 3.0) * std::pow(-p.G3, -1.0 / 3.0));
    const double rel = std::abs(fp.prefactor / stated - 1.0);
    const bool ok = std::abs(fp.alpha - 1.0 / 3.0) <= 0.05 && std::abs(fa.alpha - 0.5) <= 0.05 && rel <= 0.05;
    return {ok, fmt("Pearcey alpha=%.4f, Airy alpha=%.4f, Pearcey prefactor %.5f vs stated formula %.5f (rel %.3f)",
                    fp.alpha, fa.alpha, fp.prefactor, stated, rel)};
}

Outcome kernel_oracles() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1, 1);
    double worst = 0;
    for (int c = 0; c < 20; ++c) {
        const std::size_t n = 1 + rng() % 16;
        std::vector<double> atoms(n);
        for (auto& a : atoms) a = u(rng);
        const EmpiricalMeasure mn(atoms);
        const double s = 0.1 + 0.45 * (u(rng) + 1), t = 0.1 + 0.45 * (u(rng) + 1), x = u(rng), y = u(rng);
        const double exact = kernel_exact(mn, s, x, t, y, Precision::Extended);
        const double quad = kernel_quadrature(mn, s, x, t, y);
        worst = std::max(worst, std::abs(quad - exact) / std::abs(exact));
    }
    return {worst <= 1e-8, fmt("worst relative difference %.2e over 20 cases", worst)};
}

Outcome trend(const DensitySpec& d, const char* name) {
    const auto f = classify(d);
    std::vector<double> grid;
    for (int i = 0; i < 9; ++i) grid.push_back(-2.0 + 0.5 * i);
    // Plain compensated sums refuse these queries (10-14 cancelled digits at
    // n = 50, 100); auto keeps compensated where it is enough.
    const auto rep = converge_sweep([&](std::size_t n) { return quantile_init(d, n); }, f, {50, 100, 200},
                                    {{0.0, 0.0}, {0.5, -0.5}}, grid, Precision::Auto);
    std::ostringstream os;
    os << name << " max error";
    for (const auto& r : rep.rows) os << fmt(" n=%zu:%.4f", r.n, r.max_abs_error);
    return {rep.decreasing.value_or(false), os.str()};
}

Outcome heat_identity() {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2, 2), d(0.05, 2);
    const RescaledKernel ra(quantile_init(shifted, 200), classify(shifted));
    const RescaledKernel rp(quantile_init(quartic, 200), classify(quartic));
    double worst = 0;
    for (int c = 0; c < 10; ++c) {
        const double t2 = u(rng), t1 = t2 + d(rng), x = u(rng), y = u(rng);
        worst = std::max(worst, std::abs(ra.heat(t1, t2, x, y) / airy_heat(t1, t2, x, y) - 1.0));
        worst = std::max(worst, std::abs(rp.heat(t1, t2, x, y) / pearcey_heat(t1, t2, x, y) - 1.0));
    }
    return {worst <= 1e-14, fmt("worst relative difference %.2e (Airy and Pearcey frames)", worst)};
}

Outcome airy_representations() {
    double worst = 0;
    for (const auto& [t1, t2] : {std::pair{1.0, 0.0}, std::pair{0.5, -0.3}, std::pair{-0.4, 0.6}})
        for (int i = 0; i < 5; ++i)
            for (int k = 0; k < 5; ++k) {
                const double x = -2.0 + i, y = -2.0 + k;
                worst = std::max(worst, std::abs(airy_kernel(t1, t2, x, y) - airy_kernel_via_rep2(t1, t2, x, y)));
            }
    return {worst <= 1e-8, fmt("worst difference %.2e on 25 points x 3 time pairs", worst)};
}

Outcome fredholm_convergence() {
    double worst = 0;
    for (double a : {-2.0, 0.0, 1.0}) worst = std::max(worst, std::abs(tw2_cdf(a, 64) - tw2_cdf(a, 128)));
    const double m = tw2_mean(), oracle = tw2_mean(128, 16);
    const bool ok = worst < 1e-7 && std::abs(m - oracle) <= 1e-3;
    return {ok, fmt("q 64->128 change %.2e; mean %.6f vs doubled-order %.6f", worst, m, oracle)};
}

Outcome xi_monte_carlo() {
    const auto& ens = shifted_ensemble();
    const auto& f = shared.frame;
    const auto x0 = xi_statistic(ens, f, 0.05, 0.0), x1 = xi_statistic(ens, f, 0.05, 1.0);
    // Pair the two times by replica.
    std::vector<double> at1(ens.replicas, NAN);
    for (std::size_t i = 0; i < x1.values.size(); ++i) at1[x1.replicas[i]] = x1.values[i];
    double worst1 = 0, worst2 = 0;
    std::ostringstream os;
    for (double a : {-3.0, -2.0, -1.0, 0.0, 1.0}) {
        std::size_t hit1 = 0, hit2 = 0, both = 0;
        for (std::size_t i = 0; i < x0.values.size(); ++i) {
            if (x0.values[i] <= a) ++hit1;
            const double v = at1[x0.replicas[i]];
            if (std::isnan(v)) continue;
            ++both;
            if (x0.values[i] <= a && v <= a) ++hit2;
        }
        const auto p1 = stats::wilson(hit1, x0.values.size());
        const auto p2 = stats::wilson(hit2, both);
        const double l1 = tw2_cdf(a), l2 = airy2_fdd({0.0, 1.0}, {a, a + 1.0});
        worst1 = std::max(worst1, std::abs(p1.value - l1));
        worst2 = std::max(worst2, std::abs(p2.value - l2));
        os << fmt(" a=%g: %.3f [%.3f,%.3f] vs %.3f, joint %.3f [%.3f,%.3f] vs %.3f;", a, p1.value, p1.lo, p1.hi, l1,
                  p2.value, p2.lo, p2.hi, l2);
    }
    return {worst1 <= 0.08 && worst2 <= 0.1,
            fmt("max deviation %.3f (one time), %.3f (joint);", worst1, worst2) + os.str()};
}

Outcome meso_gap() {
    const auto& ens = shifted_ensemble();
    const auto p = meso_gap_frequency(ens, shared.frame, 0.05, 0.02, {0.0});
    return {p.value >= 0.9, fmt("frequency %.4f (%zu/%zu), 95%% CI [%.4f, %.4f]", p.value, p.hits, p.total, p.lo, p.hi)};
}

Outcome expansion_diagnostic() {
    bool ok = true;
    std::ostringstream os;
    const double eps = 0.05;
    for (const bool pearcey : {false, true}) {
        const DensitySpec& d = pearcey ? quartic : shifted;
        const double p = pearcey ? 0.75 : 2.0 / 3.0;
        const double expect = std::pow(2.0, p + 2 * eps);
        os << (pearcey ? " Pearcey" : " Airy") << fmt(" (claimed %.3f per doubling):", expect);
        double prev = 0;
        for (std::size_t n : {50u, 100u, 200u, 400u}) {
            const auto r = expansion_residual(quantile_init(d, n), d, d.x_star(), eps,
                                              pearcey ? Scaling::Pearcey : Scaling::Airy);
            if (prev > 0) {
                const double step = prev / r.residual;
                ok = ok && step >= expect / 2 && step <= expect * 2;
                os << fmt(" %.3f", step);
            }
            prev = r.residual;
        }
    }
    return {ok, "residual ratios" + os.str()};
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all{
        {1, "critical data", 1.0, critical_data},
        {2, "free convolution of a point mass", 5, semicircle},
        {3, "local exponents", 30, local_exponents},
        {4, "finite kernel oracles", 120, kernel_oracles},
        {5, "Airy kernel trend", 1200, [] { return trend(shifted, "shifted quartic"); }},
        {6, "Pearcey kernel trend", 1200, [] { return trend(quartic, "symmetric quartic"); }},
        {7, "heat term identity", 1, heat_identity},
        {8, "Airy kernel representations", 60, airy_representations},
        {9, "Fredholm self-convergence", 120, fredholm_convergence},
        {10, "top-particle law", 1800, xi_monte_carlo},
        {11, "mesoscopic gap", 900, meso_gap},
        {12, "expansion residual scaling", 300, expansion_diagnostic},
    };
    int failed = 0;
    for (const auto& c : all) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool pass = o.pass && secs <= c.budget_s;
        failed += !pass;
        std::printf("%s %2d %s: %s [%.2f s of %g s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                    c.budget_s);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
    return failed == 0 ? 0 : 1;
}
