#include "nibm/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <map>
#include <memory>
#include <mutex>

namespace nibm::quad {

namespace {

Rule build_legendre(std::size_t q) {
    Rule r;
    r.x.resize(q);
    r.w.resize(q);
    const long double pi = 3.141592653589793238462643383279502884L;
    for (std::size_t i = 0; i < (q + 1) / 2; ++i) {
        long double x = std::cos(pi * (i + 0.75L) / (q + 0.5L));
        long double dp = 0;
        for (int it = 0; it < 100; ++it) {
            long double p0 = 1, p1 = x;
            for (std::size_t k = 2; k <= q; ++k) {
                long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (q == 1) p0 = 1;
            dp = q * (x * p1 - p0) / (x * x - 1);
            const long double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-19L) break;
        }
        // Recompute the derivative at the converged node for the weight.
        long double p0 = 1, p1 = x;
        for (std::size_t k = 2; k <= q; ++k) {
            long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        if (q == 1) p0 = 1;
        dp = q * (x * p1 - p0) / (x * x - 1);
        const long double w = 2 / ((1 - x * x) * dp * dp);
        r.x[i] = static_cast<double>(-x);
        r.x[q - 1 - i] = static_cast<double>(x);
        r.w[i] = r.w[q - 1 - i] = static_cast<double>(w);
    }
    if (q % 2 == 1) r.x[q / 2] = 0.0;
    return r;
}

struct HermiteEval {
    long double pm;          // p_m(x)
    long double pm1;         // p_{m-1}(x)
    long double christoffel; // sum_{k<m} p_k(x)^2
};

// Orthonormal Hermite recurrence for the weight exp(-x^2).
HermiteEval hermite_eval(std::size_t m, long double x) {
    const long double pi = 3.141592653589793238462643383279502884L;
    long double prev = 0, cur = 1.0L / std::pow(pi, 0.25L);
    long double sum = cur * cur;
    for (std::size_t k = 0; k + 1 < m; ++k) {
        const long double next = x * std::sqrt(2.0L / (k + 1)) * cur -
                                 std::sqrt(static_cast<long double>(k) / (k + 1)) * prev;
        prev = cur;
        cur = next;
        sum += cur * cur;
    }
    const long double pm = x * std::sqrt(2.0L / m) * cur -
                           std::sqrt(static_cast<long double>(m - 1) / m) * prev;
    return {pm, cur, sum};
}

// Golub-Welsch start values, then Newton on the orthonormal recurrence.
Rule build_hermite(std::size_t m) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    Eigen::VectorXd off(static_cast<Eigen::Index>(m > 0 ? m - 1 : 0));
    for (std::size_t k = 1; k < m; ++k) off[static_cast<Eigen::Index>(k - 1)] = std::sqrt(k / 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
    Rule r;
    r.x.resize(m);
    r.w.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        long double x = es.eigenvalues()[static_cast<Eigen::Index>(i)];
        for (int it = 0; it < 8; ++it) {
            const HermiteEval e = hermite_eval(m, x);
            const long double dx = e.pm / (std::sqrt(2.0L * m) * e.pm1);
            x -= dx;
            if (std::fabs(dx) < 1e-18L * std::max(1.0L, std::fabs(x))) break;
        }
        r.x[i] = static_cast<double>(x);
        r.w[i] = static_cast<double>(1.0L / hermite_eval(m, x).christoffel);
    }
    // Enforce exact symmetry of the rule.
    for (std::size_t i = 0; i < m / 2; ++i) {
        const double xs = 0.5 * (r.x[m - 1 - i] - r.x[i]);
        const double ws = 0.5 * (r.w[m - 1 - i] + r.w[i]);
        r.x[i] = -xs;
        r.x[m - 1 - i] = xs;
        r.w[i] = r.w[m - 1 - i] = ws;
    }
    if (m % 2 == 1) r.x[m / 2] = 0.0;
    return r;
}

template <class Build>
const Rule& cached(std::map<std::size_t, std::unique_ptr<Rule>>& cache, std::mutex& mu,
                   std::size_t q, Build build) {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(q);
    if (it == cache.end()) it = cache.emplace(q, std::make_unique<Rule>(build(q))).first;
    return *it->second;
}

} // namespace

const Rule& gauss_legendre(std::size_t q) {
    if (q == 0) throw DomainError("Gauss-Legendre order must be positive");
    static std::map<std::size_t, std::unique_ptr<Rule>> cache;
    static std::mutex mu;
    return cached(cache, mu, q, build_legendre);
}

const Rule& gauss_hermite(std::size_t m) {
    if (m == 0) throw DomainError("Gauss-Hermite order must be positive");
    static std::map<std::size_t, std::unique_ptr<Rule>> cache;
    static std::mutex mu;
    return cached(cache, mu, m, build_hermite);
}

Rule composite(const std::vector<double>& edges, std::size_t per_panel) {
    const Rule& g = gauss_legendre(per_panel);
    Rule r;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double a = edges[p], b = edges[p + 1];
        const double h = 0.5 * (b - a), c = 0.5 * (a + b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            r.x.push_back(c + h * g.x[i]);
            r.w.push_back(h * g.w[i]);
        }
    }
    return r;
}

} // namespace nibm::quad
