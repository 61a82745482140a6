#include "nibm/measures.hpp"

#include "nibm/error.hpp"
#include "nibm/quadrature.hpp"
#include "nibm/simd.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace nibm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double power_mass_left(double L, double kappa) { return std::pow(L, kappa + 1.0) / (kappa + 1.0); }

} // namespace

// ---------------------------------------------------------------- DensitySpec

DensitySpec DensitySpec::power(double a, double b, double x_star, double kappa) {
    if (!(a < b)) throw DomainError("density support needs a < b");
    if (!(x_star >= a && x_star <= b)) throw DomainError("critical point outside the support");
    if (!(kappa >= 0.0)) throw DomainError("vanishing exponent must be non-negative");
    DensitySpec d;
    d.kind_ = Kind::Power;
    d.a_ = a;
    d.b_ = b;
    d.x_star_ = x_star;
    d.kappa_ = kappa;
    d.c_ = 1.0 / (power_mass_left(x_star - a, kappa) + power_mass_left(b - x_star, kappa));
    return d;
}

DensitySpec DensitySpec::uniform(double a, double b) { return power(a, b, a, 0.0); }

DensitySpec DensitySpec::table(std::vector<double> xs, std::vector<double> values, double x_star,
                               double kappa) {
    if (xs.size() < 2 || xs.size() != values.size())
        throw DomainError("density table needs at least two (x, psi) rows of equal length");
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(values[i]) || values[i] < 0.0)
            throw DomainError("density table entries must be finite and psi >= 0");
        if (i > 0 && !(xs[i] > xs[i - 1])) throw DomainError("density table x must increase strictly");
    }
    DensitySpec d;
    d.kind_ = Kind::Table;
    d.a_ = xs.front();
    d.b_ = xs.back();
    d.x_star_ = x_star;
    d.kappa_ = kappa;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
        total += 0.5 * (values[i] + values[i + 1]) * (xs[i + 1] - xs[i]);
    if (!(total > 0.0)) throw DomainError("density table has zero mass");
    for (double& v : values) v /= total;
    d.c_ = 1.0 / total;
    d.tcum_.assign(xs.size(), 0.0);
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
        d.tcum_[i + 1] = d.tcum_[i] + 0.5 * (values[i] + values[i + 1]) * (xs[i + 1] - xs[i]);
    d.tx_ = std::move(xs);
    d.tv_ = std::move(values);
    if (!(x_star >= d.a_ && x_star <= d.b_)) throw DomainError("critical point outside the support");
    return d;
}

double DensitySpec::density(double x) const {
    if (x < a_ || x > b_) return 0.0;
    if (kind_ == Kind::Power) return c_ * std::pow(std::abs(x - x_star_), kappa_);
    auto it = std::upper_bound(tx_.begin(), tx_.end(), x);
    if (it == tx_.end()) return tv_.back();
    const std::size_t i = static_cast<std::size_t>(it - tx_.begin()) - 1;
    const double h = tx_[i + 1] - tx_[i];
    const double f = (x - tx_[i]) / h;
    return tv_[i] * (1.0 - f) + tv_[i + 1] * f;
}

double DensitySpec::density_offset(double r, int side) const {
    const double x = x_star_ + side * r;
    if (x < a_ || x > b_) return 0.0;
    if (kind_ == Kind::Power) return c_ * std::pow(r, kappa_);
    return density(x);
}

double DensitySpec::cdf(double x) const {
    if (x <= a_) return 0.0;
    if (x >= b_) return 1.0;
    if (kind_ == Kind::Power) {
        const double k1 = kappa_ + 1.0;
        const double left = power_mass_left(x_star_ - a_, kappa_);
        if (x <= x_star_) return c_ * (left - std::pow(x_star_ - x, k1) / k1);
        return c_ * (left + std::pow(x - x_star_, k1) / k1);
    }
    auto it = std::upper_bound(tx_.begin(), tx_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - tx_.begin()) - 1;
    const double t = x - tx_[i];
    const double slope = (tv_[i + 1] - tv_[i]) / (tx_[i + 1] - tx_[i]);
    return tcum_[i] + tv_[i] * t + 0.5 * slope * t * t;
}

double DensitySpec::quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile level outside [0, 1]");
    if (kind_ == Kind::Power) {
        const double k1 = kappa_ + 1.0;
        const double left = std::pow(x_star_ - a_, k1);
        const double s = p * k1 / c_ - left;
        if (s <= 0.0) return x_star_ - std::pow(-s, 1.0 / k1);
        return std::min(b_, x_star_ + std::pow(s, 1.0 / k1));
    }
    if (p == 0.0) return a_;
    if (p == 1.0) return b_;
    // A zero-mass cell whose cumulative level equals p leaves F^{-1}(p)
    // undefined.
    for (std::size_t i = 0; i + 1 < tx_.size(); ++i) {
        const bool flat = tv_[i] == 0.0 && tv_[i + 1] == 0.0;
        if (flat && std::abs(tcum_[i] - p) <= 1e-15) {
            std::ostringstream msg;
            msg << "non-invertible CDF: level " << p << " sits on the flat piece [" << tx_[i] << ", "
                << tx_[i + 1] << "]";
            throw DomainError(msg.str());
        }
    }
    auto it = std::lower_bound(tcum_.begin(), tcum_.end(), p);
    std::size_t i = static_cast<std::size_t>(it - tcum_.begin());
    i = std::clamp<std::size_t>(i, 1, tx_.size() - 1) - 1;
    const double dp = p - tcum_[i];
    const double h = tx_[i + 1] - tx_[i];
    const double v = tv_[i];
    const double slope = (tv_[i + 1] - v) / h;
    double t;
    if (std::abs(slope) * h < 1e-14 * std::max(v, 1e-300)) t = dp / v;
    else t = 2.0 * dp / (v + std::sqrt(std::max(0.0, v * v + 2.0 * slope * dp)));
    return std::clamp(tx_[i] + t, tx_[i], tx_[i + 1]);
}

DensitySpec DensitySpec::reflected(double c) const {
    if (kind_ == Kind::Power) return power(2 * c - b_, 2 * c - a_, 2 * c - x_star_, kappa_);
    std::vector<double> xs(tx_.rbegin(), tx_.rend()), vs(tv_.rbegin(), tv_.rend());
    for (double& x : xs) x = 2 * c - x;
    return table(std::move(xs), std::move(vs), 2 * c - x_star_, kappa_);
}

// ---------------------------------------------------------- EmpiricalMeasure

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> atoms) : x_(std::move(atoms)) {
    if (x_.empty()) throw DomainError("empirical measure needs at least one atom");
    for (double v : x_)
        if (!std::isfinite(v)) throw DomainError("atoms must be finite");
    std::sort(x_.begin(), x_.end());
    const double spread = x_.back() - x_.front();
    for (std::size_t i = 1; i < x_.size(); ++i) {
        if (!(x_[i] - x_[i - 1] > 1e-14 * spread)) {
            std::ostringstream msg;
            msg << std::setprecision(17) << "atoms " << i - 1 << " and " << i << " collide at "
                << x_[i];
            throw DomainError(msg.str());
        }
    }
}

double EmpiricalMeasure::cdf(double x) const {
    return static_cast<double>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin()) /
           static_cast<double>(x_.size());
}

EmpiricalMeasure EmpiricalMeasure::reflected(double c) const {
    std::vector<double> y(x_);
    for (double& v : y) v = 2 * c - v;
    return EmpiricalMeasure(std::move(y));
}

std::pair<double, double> support_hull(const Measure& m) {
    if (auto* d = std::get_if<DensitySpec>(&m)) return {d->a(), d->b()};
    const auto& e = std::get<EmpiricalMeasure>(m);
    return {e.min(), e.max()};
}

// ------------------------------------------------------------- quantile init

EmpiricalMeasure quantile_init(const DensitySpec& spec, std::size_t n, DisplacementRule rule) {
    if (n < 2) throw DomainError("quantile_init needs n >= 2");
    if (!(rule.m > 0.0)) throw DomainError("displacement window factor m must be positive");
    std::vector<double> x(n);
    for (std::size_t j = 1; j <= n; ++j)
        x[j - 1] = spec.quantile(static_cast<double>(j) / static_cast<double>(n));
    for (std::size_t j = 1; j < n; ++j)
        if (!(x[j] > x[j - 1]))
            throw DomainError("non-invertible CDF: two quantiles coincide at " + std::to_string(x[j]));

    if (spec.kappa() > 0.0 && spec.x_star() > spec.a() && spec.x_star() < spec.b()) {
        const double h = rule.m * std::pow(static_cast<double>(n), -1.0 / (spec.kappa() + 1.0));
        const double lo = spec.x_star() - h;
        // Open window: for odd n and a power density the two central
        // quantiles sit exactly on its edge when m = 1.
        std::vector<std::size_t> inside;
        for (std::size_t j = 0; j < n; ++j)
            if (std::abs(x[j] - spec.x_star()) < h * (1.0 - 1e-12)) inside.push_back(j);
        if (inside.size() > 1) {
            std::ostringstream msg;
            msg << inside.size() << " quantiles fall inside the window of half-width " << h
                << " around x*; n=" << n << " is too small for m=" << rule.m;
            throw DomainError(msg.str());
        }
        if (inside.size() == 1) {
            const std::size_t j = inside.front();
            if (j == 0) x[0] = lo - h;
            else if (x[j - 1] < lo) x[j] = 0.5 * (x[j - 1] + lo);
            else
                throw DomainError("displacement cannot preserve ordering: lower neighbour is inside the "
                                  "window; increase n or decrease m");
        }
    }
    return EmpiricalMeasure(std::move(x));
}

double cdf_distance(const EmpiricalMeasure& mn, const Measure& other) {
    const double n = static_cast<double>(mn.size());
    const auto& x = mn.atoms();
    double sup = 0.0;
    if (auto* d = std::get_if<DensitySpec>(&other)) {
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double F = d->cdf(x[j]);
            sup = std::max({sup, std::abs((j + 1) / n - F), std::abs(j / n - F)});
        }
        return sup;
    }
    const auto& e = std::get<EmpiricalMeasure>(other);
    std::vector<double> pts(x);
    pts.insert(pts.end(), e.atoms().begin(), e.atoms().end());
    const double m = static_cast<double>(e.size());
    for (double p : pts) {
        const auto below = [p](const std::vector<double>& v) {
            return static_cast<double>(std::lower_bound(v.begin(), v.end(), p) - v.begin());
        };
        sup = std::max({sup, std::abs(mn.cdf(p) - e.cdf(p)), std::abs(below(x) / n - below(e.atoms()) / m)});
    }
    return sup;
}

double assumption2_constant(const EmpiricalMeasure& mn, const DensitySpec& spec) {
    return static_cast<double>(mn.size()) * cdf_distance(mn, spec);
}

bool gap_check(const EmpiricalMeasure& mn, double x_star, double kappa, double m) {
    if (!(m > 0.0)) throw DomainError("gap_check needs m > 0");
    const double h = m * std::pow(static_cast<double>(mn.size()), -1.0 / (kappa + 1.0));
    auto it = std::lower_bound(mn.atoms().begin(), mn.atoms().end(), x_star - h);
    return it == mn.atoms().end() || *it > x_star + h;
}

// ----------------------------------------------------------------- integrals

namespace {

std::vector<double> breakpoints(const DensitySpec& d, std::initializer_list<double> extra) {
    std::vector<double> br{d.a(), d.b(), d.x_star()};
    for (double e : extra)
        if (e > d.a() && e < d.b()) br.push_back(e);
    if (d.kind() == DensitySpec::Kind::Table) br.insert(br.end(), d.table_x().begin(), d.table_x().end());
    return br;
}

// Geometric breakpoints around x so that a peak of width y is resolved.
void add_geometric(std::vector<double>& br, const DensitySpec& d, double x, double y) {
    if (!(y > 0.0)) return;
    for (double r = y; r < d.b() - d.a(); r *= 8.0) {
        if (x - r > d.a() && x - r < d.b()) br.push_back(x - r);
        if (x + r > d.a() && x + r < d.b()) br.push_back(x + r);
    }
}

// \int psi(s) / (x - s)^{j+1} ds for x in [a, b] where psi(x) = 0.
double moment_at_zero(const DensitySpec& d, double x, int j) {
    const bool at_star = x == d.x_star();
    auto f = [&](double r, int side) {
        if (r <= 0.0) return 0.0;
        if (at_star && d.kind() == DensitySpec::Kind::Power) {
            if (r > (side < 0 ? x - d.a() : d.b() - x)) return 0.0;
            return d.normalization() * std::pow(r, d.kappa() - j - 1);
        }
        const double psi = at_star ? d.density_offset(r, side) : d.density(x + side * r);
        const double den = std::pow(r, j + 1);
        return den > 0.0 ? psi / den : 0.0;
    };
    // Left part: s = x - r, (x - s) = r. Right part: s = x + r, (x - s) = -r.
    auto half = [&](int side) {
        const double len = side < 0 ? x - d.a() : d.b() - x;
        if (len <= 0.0) return 0.0;
        double first = len;
        if (d.kind() == DensitySpec::Kind::Table) {
            for (double t : d.table_x()) {
                const double r = side * (t - x);
                if (r > 0.0 && r < first) first = r;
            }
        }
        double v = quad::endpoint_singular([&](double r) { return f(r, side); }, 0.0, first, 1e-14);
        if (first < len) {
            std::vector<double> br{first, len};
            for (double t : d.table_x()) {
                const double r = side * (t - x);
                if (r > first && r < len) br.push_back(r);
            }
            v += quad::adaptive_pieces([&](double r) { return f(r, side); }, br);
        }
        return v;
    };
    const double sign_right = (j % 2 == 0) ? -1.0 : 1.0; // (-r)^{-(j+1)}
    return half(-1) + sign_right * half(+1);
}

// \int psi(s) / (x - s)^{j+1} ds for any admissible x; throws on divergence.
double moment(const DensitySpec& d, double x, int j) {
    if (x < d.a() || x > d.b()) {
        auto br = breakpoints(d, {});
        const double edge = x < d.a() ? d.a() : d.b();
        add_geometric(br, d, edge, std::abs(x - edge));
        return quad::adaptive_pieces([&](double s) { return d.density(s) / std::pow(x - s, j + 1); }, br);
    }
    if (x == d.x_star()) {
        if (!(d.kappa() > j)) {
            std::ostringstream msg;
            msg << "divergent integral: order " << j << " at x* requires kappa > " << j << " (kappa = "
                << d.kappa() << ")";
            throw DomainError(msg.str());
        }
        return moment_at_zero(d, x, j);
    }
    if (d.density(x) > 0.0) {
        std::ostringstream msg;
        msg << "divergent integral: the density does not vanish at x = " << x;
        throw DomainError(msg.str());
    }
    return moment_at_zero(d, x, j);
}

double factorial(int j) {
    double f = 1.0;
    for (int i = 2; i <= j; ++i) f *= i;
    return f;
}

// psi and psi' at x (one-sided from the right at table nodes).
std::pair<double, double> local_linear(const DensitySpec& d, double x) {
    if (x < d.a() || x > d.b()) return {0.0, 0.0};
    if (d.kind() == DensitySpec::Kind::Power) {
        const double r = std::abs(x - d.x_star());
        if (r == 0.0 || d.kappa() == 0.0) return {d.density(x), 0.0};
        const double sgn = x > d.x_star() ? 1.0 : -1.0;
        return {d.density(x), sgn * d.normalization() * d.kappa() * std::pow(r, d.kappa() - 1.0)};
    }
    const auto& tx = d.table_x();
    const auto& tv = d.table_values();
    auto it = std::upper_bound(tx.begin(), tx.end(), x);
    std::size_t i = static_cast<std::size_t>(it - tx.begin());
    i = std::clamp<std::size_t>(i, 1, tx.size() - 1) - 1;
    return {d.density(x), (tv[i + 1] - tv[i]) / (tx[i + 1] - tx[i])};
}

struct Lorentz {
    double inv_sq; // \int psi / ((x-s)^2 + y^2)
    double cauchy; // \int psi (x-s) / ((x-s)^2 + y^2)
};

// For x on the support the peak of width y is integrated analytically against
// the linear Taylor polynomial of psi at x; the quadrature only sees the
// bounded remainder.
Lorentz lorentz_integrals(const DensitySpec& d, double x, double y, bool want_cauchy) {
    auto br = breakpoints(d, {x});
    add_geometric(br, d, x, y);
    const double y2 = y * y;
    Lorentz out{0.0, 0.0};
    if (x < d.a() || x > d.b()) {
        out.inv_sq = quad::adaptive_pieces(
            [&](double s) {
                const double u = x - s;
                return d.density(s) / (u * u + y2);
            },
            br);
        if (want_cauchy)
            out.cauchy = quad::adaptive_pieces(
                [&](double s) {
                    const double u = x - s;
                    return d.density(s) * u / (u * u + y2);
                },
                br);
        return out;
    }
    const auto [p, q] = local_linear(d, x);
    const double ra = x - d.a(), rb = d.b() - x;
    const double at = std::atan(rb / y) + std::atan(ra / y);
    const double A1 = at / y;
    const double A2 = 0.5 * std::log((rb * rb + y2) / (ra * ra + y2));
    const double A3 = (d.b() - d.a()) - y * at;
    auto rem = [&](double s) { return d.density(s) - p - q * (s - x); };
    const double main_sq = p * A1 + q * A2;
    out.inv_sq = main_sq + quad::adaptive_pieces(
                               [&](double s) {
                                   const double u = s - x;
                                   return rem(s) / (u * u + y2);
                               },
                               br, 1e-12, std::abs(p * A1) + std::abs(q * A2));
    if (want_cauchy)
        out.cauchy = -(p * A2 + q * A3 +
                       quad::adaptive_pieces(
                           [&](double s) {
                               const double u = s - x;
                               return rem(s) * u / (u * u + y2);
                           },
                           br, 1e-12, std::abs(p * A2) + std::abs(q * A3)));
    return out;
}

} // namespace

std::complex<double> stieltjes(const Measure& m, std::complex<double> z) {
    if (auto* e = std::get_if<EmpiricalMeasure>(&m)) {
        if (z.imag() == 0.0 && std::binary_search(e->atoms().begin(), e->atoms().end(), z.real()))
            throw PoleError("Stieltjes transform evaluated at an atom");
        return simd::cauchy_sum(e->atoms().data(), e->size(), z) / static_cast<double>(e->size());
    }
    const auto& d = std::get<DensitySpec>(m);
    const double zr = z.real(), zi = z.imag();
    if (zi == 0.0) {
        if (zr >= d.a() && zr <= d.b() && d.density(zr) > 0.0)
            throw DomainError("Stieltjes transform on the support: use stieltjes_derivs at a zero of the density");
        return {moment(d, zr, 0), 0.0};
    }
    const auto L = lorentz_integrals(d, zr, std::abs(zi), true);
    const double re = L.cauchy;
    const double im = -zi * L.inv_sq;
    return {re, im};
}

StieltjesDerivatives stieltjes_derivs(const Measure& m, double x, int max_order) {
    if (max_order < 0 || max_order > 3) throw DomainError("stieltjes_derivs supports orders 0..3");
    StieltjesDerivatives r;
    r.x = x;
    double g[4] = {0, 0, 0, std::numeric_limits<double>::quiet_NaN()};
    for (int j = max_order + 1; j < 4; ++j) g[j] = std::numeric_limits<double>::quiet_NaN();
    if (auto* e = std::get_if<EmpiricalMeasure>(&m)) {
        const double n = static_cast<double>(e->size());
        double s[4] = {0, 0, 0, 0};
        for (double a : e->atoms()) {
            const double u = x - a;
            if (u == 0.0) throw PoleError("stieltjes_derivs evaluated at an atom");
            const double inv = 1.0 / u;
            double p = inv;
            for (int j = 0; j <= max_order; ++j, p *= inv) s[j] += p;
        }
        for (int j = 0; j <= max_order; ++j) g[j] = ((j % 2) ? -1.0 : 1.0) * factorial(j) * s[j] / n;
    } else {
        const auto& d = std::get<DensitySpec>(m);
        for (int j = 0; j <= max_order; ++j)
            g[j] = ((j % 2) ? -1.0 : 1.0) * factorial(j) * moment(d, x, j);
    }
    r.G0 = g[0];
    r.G1 = g[1];
    r.G2 = g[2];
    r.G3 = g[3];
    return r;
}

double inverse_square_integral(const Measure& m, double x, double y) {
    if (auto* e = std::get_if<EmpiricalMeasure>(&m)) {
        if (y == 0.0 && std::binary_search(e->atoms().begin(), e->atoms().end(), x)) return kInf;
        return simd::inv_sq_sum(e->atoms().data(), e->size(), x, y * y) / static_cast<double>(e->size());
    }
    const auto& d = std::get<DensitySpec>(m);
    if (y == 0.0) {
        if (x >= d.a() && x <= d.b()) {
            if (d.density(x) > 0.0) return kInf;
            if (x == d.x_star() && !(d.kappa() > 1.0)) return kInf;
        }
        return moment(d, x, 1);
    }
    return lorentz_integrals(d, x, y, false).inv_sq;
}

std::complex<double> log_potential(const EmpiricalMeasure& mn, std::complex<double> z) {
    std::complex<double> s = 0.0;
    for (double a : mn.atoms()) {
        const std::complex<double> u = z - a;
        if (u == 0.0) throw PoleError("log potential evaluated at an atom");
        s += std::log(u);
    }
    return s / static_cast<double>(mn.size());
}

ExpansionResidual expansion_residual(const EmpiricalMeasure& mn, const Measure& base, double x_star,
                                     double eps, Scaling regime) {
    const double n = static_cast<double>(mn.size());
    const int J = regime == Scaling::Airy ? 2 : 3;
    const auto g = stieltjes_derivs(base, x_star, J);
    const double coef[4] = {g.G0, g.G1, g.G2 / 2.0, g.G3 / 6.0};
    ExpansionResidual out;
    out.radius = std::pow(n, (regime == Scaling::Airy ? -1.0 / 3.0 : -0.25) + eps);
    constexpr int kRadii = 12, kAngles = 48;
    const double scale = out.radius;
    auto eval = [&](std::complex<double> z) {
        for (double a : mn.atoms())
            if (std::abs(z - a) < 1e-12 * std::max(1.0, scale)) {
                ++out.skipped;
                return;
            }
        const std::complex<double> gn =
            simd::cauchy_sum(mn.atoms().data(), mn.size(), z) / n;
        const std::complex<double> w = z - x_star;
        std::complex<double> taylor = coef[J];
        for (int j = J - 1; j >= 0; --j) taylor = taylor * w + coef[j];
        out.residual = std::max(out.residual, std::abs(gn - taylor));
    };
    eval({x_star, 0.0});
    for (int i = 1; i <= kRadii; ++i) {
        const double r = out.radius * i / kRadii;
        for (int k = 0; k < kAngles; ++k) {
            const double th = 2.0 * std::numbers::pi * k / kAngles;
            eval({x_star + r * std::cos(th), r * std::sin(th)});
        }
    }
    return out;
}

double fit_vanishing_exponent(const DensitySpec& spec) {
    double total = 0.0;
    int sides = 0;
    for (int side : {-1, 1}) {
        const double len = side < 0 ? spec.x_star() - spec.a() : spec.b() - spec.x_star();
        if (len <= 0.0) continue;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        for (int k = 10; k <= 30; ++k) {
            const double r = std::ldexp(len, -k);
            const double v = spec.density_offset(r, side);
            if (!(v > 0.0)) continue;
            const double lx = std::log(r), ly = std::log(v);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++cnt;
        }
        if (cnt < 3) continue;
        total += (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
        ++sides;
    }
    if (sides == 0) throw DomainError("density vanishes identically near x*; exponent fit undefined");
    return total / sides;
}

void write_atoms_csv(std::ostream& os, const EmpiricalMeasure& mn) {
    os << "index,position\n";
    os << std::setprecision(17);
    for (std::size_t i = 0; i < mn.size(); ++i) os << (i + 1) << ',' << mn[i] << '\n';
    if (!os) throw IoError("failed writing atom CSV");
}

EmpiricalMeasure read_atoms_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("empty atom CSV");
    if (line.rfind("index,position", 0) != 0) throw IoError("atom CSV must start with header index,position");
    std::vector<double> x;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw IoError("atom CSV row " + std::to_string(row) + " lacks a comma");
        try {
            x.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw IoError("atom CSV row " + std::to_string(row) + " has a malformed position");
        }
    }
    return EmpiricalMeasure(std::move(x));
}

} // namespace nibm
