#include "nibm/fredholm.hpp"

#include "nibm/error.hpp"
#include "nibm/kernels_limit.hpp"
#include "nibm/quadrature.hpp"
#include "parallel.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nibm {

namespace {

// Composite Gauss-Legendre on [0, len] with panels of at most `h`.
quad::Rule r_rule(double len, double h) {
    const std::size_t panels = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / h)));
    std::vector<double> edges;
    for (std::size_t i = 0; i <= panels; ++i) edges.push_back(len * i / panels);
    return quad::composite(edges, 16);
}

// Ai(u_i + sign * r_k), zero where the argument is far into the decaying side.
Eigen::MatrixXd airy_table(const std::vector<double>& us, const quad::Rule& r, double sign) {
    Eigen::MatrixXd out(us.size(), r.size());
    for (std::size_t i = 0; i < us.size(); ++i)
        for (std::size_t k = 0; k < r.size(); ++k) {
            const double x = us[i] + sign * r.x[k];
            out(i, k) = x > 100.0 ? 0.0 : airy_ai(x);
        }
    return out;
}

double min_of(const std::vector<double>& a, const std::vector<double>& b) {
    return std::min(*std::min_element(a.begin(), a.end()), *std::min_element(b.begin(), b.end()));
}

// Equal-time Airy kernel.
Eigen::MatrixXd airy_same_time(const std::vector<double>& us, const std::vector<double>& vs) {
    std::vector<double> ai_u(us.size()), aip_u(us.size()), ai_v(vs.size()), aip_v(vs.size());
    for (std::size_t i = 0; i < us.size(); ++i) {
        ai_u[i] = us[i] > 100.0 ? 0.0 : airy_ai(us[i]);
        aip_u[i] = us[i] > 100.0 ? 0.0 : airy_ai_prime(us[i]);
    }
    for (std::size_t k = 0; k < vs.size(); ++k) {
        ai_v[k] = vs[k] > 100.0 ? 0.0 : airy_ai(vs[k]);
        aip_v[k] = vs[k] > 100.0 ? 0.0 : airy_ai_prime(vs[k]);
    }
    Eigen::MatrixXd out(us.size(), vs.size());
    for (std::size_t i = 0; i < us.size(); ++i)
        for (std::size_t k = 0; k < vs.size(); ++k) {
            const double d = us[i] - vs[k];
            out(i, k) = d == 0.0 ? aip_u[i] * aip_u[i] - us[i] * ai_u[i] * ai_u[i]
                                 : (ai_u[i] * aip_v[k] - aip_u[i] * ai_v[k]) / d;
        }
    return out;
}

// Stationary Airy block for tau gap delta = tau_b - tau_a != 0.
Eigen::MatrixXd airy_cross_time(double delta, const std::vector<double>& us, const std::vector<double>& vs) {
    const double lo = min_of(us, vs);
    if (delta > 0.0) {
        // int_0^inf e^{-r delta} Ai(u + r) Ai(v + r) dr
        const auto r = r_rule(std::max(2.0, 16.0 - lo), 0.5);
        Eigen::VectorXd w(r.size());
        for (std::size_t k = 0; k < r.size(); ++k) w[k] = r.w[k] * std::exp(-r.x[k] * delta);
        return airy_table(us, r, 1.0) * w.asDiagonal() * airy_table(vs, r, 1.0).transpose();
    }
    const double a = -delta;
    const double reach = 36.0 / a;
    if (a >= 0.5 && lo - reach >= -48.0) {
        // -int_0^inf e^{-s a} Ai(u - s) Ai(v - s) ds; the tail past `reach` is
        // below e^{-36}.
        const auto r = r_rule(reach, 0.25);
        Eigen::VectorXd w(r.size());
        for (std::size_t k = 0; k < r.size(); ++k) w[k] = -r.w[k] * std::exp(-r.x[k] * a);
        return airy_table(us, r, -1.0) * w.asDiagonal() * airy_table(vs, r, -1.0).transpose();
    }
    // int_0^inf e^{r a} Ai(u + r) Ai(v + r) dr minus the full-line integral,
    // which is Gaussian in closed form. Cut r where the decay of the Airy pair
    // has beaten the growth by e^{-40}.
    double len = 2.0;
    while (a * len - (4.0 / 3.0) * std::pow(std::max(lo + len, 0.0), 1.5) > -40.0) len += 0.5;
    const auto r = r_rule(len, 0.5);
    Eigen::VectorXd w(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) w[k] = r.w[k] * std::exp(r.x[k] * a);
    Eigen::MatrixXd out = airy_table(us, r, 1.0) * w.asDiagonal() * airy_table(vs, r, 1.0).transpose();
    const double norm = 1.0 / std::sqrt(4.0 * std::numbers::pi * a);
    for (std::size_t i = 0; i < us.size(); ++i)
        for (std::size_t k = 0; k < vs.size(); ++k) {
            const double d = us[i] - vs[k];
            out(i, k) -= norm * std::exp(-d * d / (4.0 * a) - a * (us[i] + vs[k]) / 2.0 + a * a * a / 12.0);
        }
    return out;
}

void check_problem(const FredholmProblem& p) {
    const std::size_t m = p.taus.size();
    if (m == 0) throw DomainError("fredholm_det needs at least one time");
    if (p.lower.size() != m || p.upper.size() != m) throw DomainError("one threshold pair per time required");
    if (p.q < 8) throw DomainError("fredholm_det needs q >= 8");
    for (std::size_t j = 0; j < m; ++j) {
        if (j > 0 && !(p.taus[j] > p.taus[j - 1])) throw DomainError("times must be strictly increasing");
        if (!(p.lower[j] < p.upper[j])) throw DomainError("each window needs lower < upper");
        if (!std::isfinite(p.lower[j])) throw DomainError("lower thresholds must be finite");
    }
}

} // namespace

KernelSource KernelSource::limit_airy() { return {}; }

KernelSource KernelSource::finite(std::shared_ptr<const RescaledKernel> kernel) {
    if (!kernel) throw DomainError("finite kernel source needs a kernel");
    KernelSource s;
    s.kind_ = Kind::Finite;
    s.finite_ = std::move(kernel);
    return s;
}

KernelSource KernelSource::custom(BlockFn fn) {
    KernelSource s;
    s.kind_ = Kind::Custom;
    s.custom_ = std::move(fn);
    return s;
}

Eigen::MatrixXd KernelSource::block(const std::vector<double>& taus, std::size_t a, std::size_t b,
                                    const std::vector<double>& us, const std::vector<double>& vs) const {
    switch (kind_) {
    case Kind::LimitAiry:
        return a == b ? airy_same_time(us, vs) : airy_cross_time(taus[b] - taus[a], us, vs);
    case Kind::Finite: {
        const int o = finite_->frame().orientation();
        if (o > 0) return finite_->grid(taus[a], taus[b], us, vs);
        std::vector<double> ru(us.size()), rv(vs.size());
        std::transform(us.begin(), us.end(), ru.begin(), [](double u) { return -u; });
        std::transform(vs.begin(), vs.end(), rv.begin(), [](double v) { return -v; });
        return finite_->grid(taus[a], taus[b], ru, rv);
    }
    case Kind::Custom: return custom_(a, b, us, vs);
    }
    return {};
}

IntervalRule interval_rule(double a, double b, std::size_t q) {
    const auto& gl = quad::gauss_legendre(q);
    IntervalRule r;
    r.u.resize(q);
    r.w.resize(q);
    for (std::size_t i = 0; i < q; ++i) {
        if (std::isinf(b)) {
            // s in [0, 1), u = a + s / (1 - s)
            const double s = 0.5 * (1.0 + gl.x[i]);
            r.u[i] = a + s / (1.0 - s);
            r.w[i] = 0.5 * gl.w[i] / ((1.0 - s) * (1.0 - s));
        } else {
            r.u[i] = a + 0.5 * (b - a) * (1.0 + gl.x[i]);
            r.w[i] = 0.5 * (b - a) * gl.w[i];
        }
    }
    return r;
}

double fredholm_det(const FredholmProblem& p) {
    check_problem(p);
    const std::size_t m = p.taus.size(), q = p.q;
    std::vector<IntervalRule> rules;
    for (std::size_t j = 0; j < m; ++j) rules.push_back(interval_rule(p.lower[j], p.upper[j], q));

    Eigen::MatrixXd mat(m * q, m * q);
    detail::parallel_for(m * m, [&](std::size_t idx) {
        const std::size_t a = idx / m, b = idx % m;
        const Eigen::MatrixXd k = p.source.block(p.taus, a, b, rules[a].u, rules[b].u);
        if (k.rows() != static_cast<Eigen::Index>(q) || k.cols() != static_cast<Eigen::Index>(q))
            throw DomainError("kernel source returned a block of the wrong shape");
        for (std::size_t i = 0; i < q; ++i)
            for (std::size_t l = 0; l < q; ++l)
                mat(a * q + i, b * q + l) =
                    (a == b && i == l ? 1.0 : 0.0) - std::sqrt(rules[a].w[i]) * k(i, l) * std::sqrt(rules[b].w[l]);
    });
    if (!mat.allFinite()) throw ConvergenceError("Fredholm matrix has non-finite entries");
    return Eigen::PartialPivLU<Eigen::MatrixXd>(mat).determinant();
}

double airy2_fdd(const std::vector<double>& taus, const std::vector<double>& as, std::size_t q) {
    if (taus.size() > 4) throw DomainError("airy2_fdd supports at most 4 times");
    if (!taus.empty() && taus.back() - taus.front() > 4.0) throw DomainError("airy2_fdd: time span above 4");
    FredholmProblem p;
    p.taus = taus;
    p.lower = as;
    p.upper.assign(taus.size(), std::numeric_limits<double>::infinity());
    p.q = q;
    return fredholm_det(p);
}

double tw2_cdf(double a, std::size_t q) {
    if (!(a >= -10.0 && a <= 10.0)) throw DomainError("tw2_cdf: a outside [-10, 10]");
    return airy2_fdd({0.0}, {a}, q);
}

double tw2_mean(std::size_t q, std::size_t nodes, double lo, double hi) {
    if (!(lo < 0.0 && hi > 0.0)) throw DomainError("tw2_mean needs lo < 0 < hi");
    auto part = [&](double a, double b, bool upper) {
        const std::size_t panels = static_cast<std::size_t>(std::ceil(b - a));
        std::vector<double> edges;
        for (std::size_t i = 0; i <= panels; ++i) edges.push_back(a + (b - a) * i / panels);
        const auto r = quad::composite(edges, nodes);
        double acc = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double f = tw2_cdf(r.x[i], q);
            acc += r.w[i] * (upper ? 1.0 - f : f);
        }
        return acc;
    };
    return part(0.0, hi, true) - part(lo, 0.0, false);
}

double finite_gap_probability(std::shared_ptr<const RescaledKernel> kernel, const std::vector<double>& taus,
                              const std::vector<double>& lower, std::vector<double> upper, std::size_t q) {
    if (!kernel) throw DomainError("finite_gap_probability needs a kernel");
    if (!kernel->frame().airy()) throw DomainError("finite_gap_probability needs an Airy frame");
    if (upper.empty())
        upper.assign(taus.size(), kernel->frame().scale * std::pow(kernel->n(), kernel->frame().eps));
    FredholmProblem p;
    p.taus = taus;
    p.lower = lower;
    p.upper = std::move(upper);
    p.source = KernelSource::finite(std::move(kernel));
    p.q = q;
    for (double b : p.upper)
        if (!std::isfinite(b)) throw DomainError("finite-n windows need a finite upper end");
    return fredholm_det(p);
}

} // namespace nibm
