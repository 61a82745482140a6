#pragma once

#include "nibm/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace nibm::quad {

struct Rule {
    std::vector<double> x;
    std::vector<double> w;
    std::size_t size() const { return x.size(); }
};

// Gauss-Legendre on [-1, 1]; cached, safe to call concurrently.
const Rule& gauss_legendre(std::size_t q);

// Gauss-Hermite for the weight exp(-x^2); cached.
const Rule& gauss_hermite(std::size_t m);

// Composite Gauss-Legendre nodes on [a, b] split at the given panel edges.
Rule composite(const std::vector<double>& edges, std::size_t per_panel);

// Globally adaptive 31-point Gauss-Kronrod over the panels between sorted
// breakpoints: the panel with the largest error estimate is bisected until
// the summed estimate drops below tol * max(\int|f|, scale) or the panel
// budget is spent. (Boost's recursive driver instead bisects every panel when
// a per-panel tolerance is out of reach, which is exponential in the depth.)
template <class F>
double adaptive_pieces(F&& f, std::vector<double> breaks, double tol = 1e-12, double scale = 0.0,
                       double* err_out = nullptr, std::size_t max_panels = 4000) {
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    if (breaks.size() < 2) return 0.0;
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    struct Panel {
        double lo, hi, v, e, l1;
    };
    auto eval = [&](double lo, double hi) {
        Panel p{lo, hi, 0.0, 0.0, 0.0};
        p.v = GK::integrate(f, lo, hi, 0, 0.0, &p.e, &p.l1);
        // The single-panel error comes back in [-1, 1] units.
        p.e *= 0.5 * (hi - lo);
        return p;
    };
    auto worse = [](const Panel& x, const Panel& y) { return x.e < y.e; };
    std::vector<Panel> heap;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) heap.push_back(eval(breaks[i], breaks[i + 1]));
    std::make_heap(heap.begin(), heap.end(), worse);
    double v = 0.0, e = 0.0, l1 = 0.0;
    auto total = [&] {
        v = e = l1 = 0.0;
        for (const auto& q : heap) {
            v += q.v;
            e += q.e;
            l1 += q.l1;
        }
    };
    total();
    while (e > tol * std::max(l1, scale) && heap.size() < max_panels) {
        std::pop_heap(heap.begin(), heap.end(), worse);
        const Panel p = heap.back();
        const double mid = 0.5 * (p.lo + p.hi);
        if (!(mid > p.lo && mid < p.hi)) {
            // Cannot split further; freeze this panel's error.
            heap.back().e = 0.0;
            std::push_heap(heap.begin(), heap.end(), worse);
            total();
            continue;
        }
        heap.back() = eval(p.lo, mid);
        std::push_heap(heap.begin(), heap.end(), worse);
        heap.push_back(eval(mid, p.hi));
        std::push_heap(heap.begin(), heap.end(), worse);
        total();
    }
    if (err_out) *err_out = e;
    if (!std::isfinite(v)) throw ConvergenceError("adaptive quadrature produced a non-finite value");
    return v;
}

template <class F>
double adaptive(F&& f, double a, double b, double tol = 1e-12, double* err_out = nullptr) {
    if (a == b) return 0.0;
    if (a > b) return -adaptive(f, b, a, tol, err_out);
    return adaptive_pieces(f, {a, b}, tol, 0.0, err_out);
}

// Double-exponential rule; tolerates algebraic endpoint singularities.
template <class F>
double endpoint_singular(F&& f, double a, double b, double tol = 1e-13) {
    if (a == b) return 0.0;
    static thread_local boost::math::quadrature::tanh_sinh<double> ts(12);
    double err = 0.0, l1 = 0.0;
    std::size_t levels = 0;
    const double v = ts.integrate(f, a, b, tol, &err, &l1, &levels);
    if (!std::isfinite(v))
        throw ConvergenceError("tanh-sinh quadrature produced a non-finite value");
    return v;
}

} // namespace nibm::quad
