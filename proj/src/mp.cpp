#include "mp.hpp"

#include "nibm/quadrature.hpp"

#include <map>
#include <mutex>
#include <utility>

namespace nibm::mp {

namespace {

// Orthonormal Hermite recurrence at x; leaves p_m in pm, p_{m-1} in pm1 and
// sum_{k<m} p_k^2 in christoffel.
struct Recurrence {
    Array a, b; // a_k = sqrt(2/(k+1)), b_k = sqrt(k/(k+1))
    mpfr_t p0;
    Recurrence(std::size_t m, mpfr_prec_t prec) : a(m, prec), b(m, prec) {
        for (std::size_t k = 0; k < m; ++k) {
            mpfr_set_ui(a[k], 2, kRnd);
            mpfr_div_ui(a[k], a[k], k + 1, kRnd);
            mpfr_sqrt(a[k], a[k], kRnd);
            mpfr_set_ui(b[k], k, kRnd);
            mpfr_div_ui(b[k], b[k], k + 1, kRnd);
            mpfr_sqrt(b[k], b[k], kRnd);
        }
        mpfr_init2(p0, prec);
        mpfr_const_pi(p0, kRnd);
        mpfr_rootn_ui(p0, p0, 4, kRnd);
        mpfr_ui_div(p0, 1, p0, kRnd);
    }
    ~Recurrence() { mpfr_clear(p0); }
};

} // namespace

std::shared_ptr<const HermiteHalf> gauss_hermite_half(std::size_t m, mpfr_prec_t prec) {
    static std::mutex mu;
    static std::map<std::pair<std::size_t, mpfr_prec_t>, std::shared_ptr<const HermiteHalf>> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find({m, prec});
        if (it != cache.end()) return it->second;
    }
    const auto& seed = quad::gauss_hermite(m);
    const std::size_t half = (m + 1) / 2;
    auto out = std::make_shared<HermiteHalf>();
    out->nodes = Array(half, prec);
    out->weights = Array(half, prec);
    Recurrence rec(m, prec);
    mpfr_t x, pk, pkm1, tmp, chr, dx, scale;
    for (auto* v : {x, pk, pkm1, tmp, chr, dx, scale}) mpfr_init2(v, prec);
    mpfr_set_ui(scale, 2 * m, kRnd);
    mpfr_sqrt(scale, scale, kRnd);
    auto eval = [&](bool want_chr) {
        mpfr_set(pkm1, rec.p0, kRnd); // p_0
        mpfr_mul(pk, x, rec.p0, kRnd);
        mpfr_mul(pk, pk, rec.a[0], kRnd); // p_1
        if (want_chr) {
            mpfr_sqr(chr, pkm1, kRnd);
        }
        if (m == 1) return;
        for (std::size_t k = 1; k < m; ++k) {
            if (want_chr) {
                mpfr_sqr(tmp, pk, kRnd);
                mpfr_add(chr, chr, tmp, kRnd);
            }
            // p_{k+1} = a_k x p_k - b_k p_{k-1}
            mpfr_mul(tmp, x, pk, kRnd);
            mpfr_mul(tmp, tmp, rec.a[k], kRnd);
            mpfr_mul(pkm1, pkm1, rec.b[k], kRnd);
            mpfr_sub(tmp, tmp, pkm1, kRnd);
            mpfr_swap(pkm1, pk);
            mpfr_swap(pk, tmp);
        }
    };
    // Seed nodes are ascending; the non-negative half starts at index m/2.
    for (std::size_t i = 0; i < half; ++i) {
        const double x0 = seed.x[m / 2 + i];
        mpfr_set_d(x, (m % 2 == 1 && i == 0) ? 0.0 : x0, kRnd);
        if (!(m % 2 == 1 && i == 0)) {
            for (int it = 0; it < 60; ++it) {
                eval(false);
                // Newton: dx = p_m / (sqrt(2m) p_{m-1})
                mpfr_mul(tmp, scale, pkm1, kRnd);
                mpfr_div(dx, pk, tmp, kRnd);
                mpfr_sub(x, x, dx, kRnd);
                if (mpfr_zero_p(dx) || mpfr_get_exp(dx) < mpfr_get_exp(x) - static_cast<mpfr_exp_t>(prec) + 2)
                    break;
            }
        }
        eval(true);
        mpfr_set(out->nodes[i], x, kRnd);
        mpfr_ui_div(out->weights[i], 1, chr, kRnd);
        if (!mpfr_zero_p(x)) mpfr_mul_ui(out->weights[i], out->weights[i], 2, kRnd);
    }
    for (auto* v : {x, pk, pkm1, tmp, chr, dx, scale}) mpfr_clear(v);
    std::lock_guard<std::mutex> lock(mu);
    cache[{m, prec}] = out;
    return out;
}

} // namespace nibm::mp
