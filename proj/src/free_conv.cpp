#include "nibm/free_conv.hpp"

#include "nibm/error.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace nibm {

namespace {

constexpr std::uintmax_t kMaxRootIter = 200;

// TOMS748 until the bracket is below rel_tol relative width. The functions
// solved here carry quadrature noise near 1e-13, so asking for the last few
// bits only buys bisection steps.
template <class F>
double bracketed_root(F&& f, double lo, double hi, double flo, double fhi, double rel_tol = 1e-14) {
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    std::uintmax_t iter = kMaxRootIter;
    auto tol = [rel_tol](double a, double b) {
        return std::abs(b - a) <= rel_tol * std::max(std::abs(a), std::abs(b)) + 1e-300;
    };
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iter);
    if (iter >= kMaxRootIter) throw ConvergenceError("TOMS748 did not converge");
    return 0.5 * (r.first + r.second);
}

double diameter(const Measure& m) {
    const auto [lo, hi] = support_hull(m);
    return hi - lo;
}

} // namespace

const char* regime_name(Regime r) {
    switch (r) {
    case Regime::AiryRight: return "AiryRight";
    case Regime::AiryLeft: return "AiryLeft";
    case Regime::Pearcey: return "Pearcey";
    }
    return "?";
}

double CriticalFrame::time_offset(double n, double tau) const {
    if (airy()) return 2.0 * tau / (scale * scale * std::cbrt(n));
    return tau / (scale * scale * std::sqrt(n));
}

double biane_y(const Measure& m, double t, double x) {
    if (!(t > 0.0)) throw DomainError("biane_y needs t > 0");
    const double inv_t = 1.0 / t;
    const double i0 = inverse_square_integral(m, x, 0.0);
    if (i0 <= inv_t) return 0.0;
    auto f = [&](double y) { return inverse_square_integral(m, x, y) - inv_t; };
    double hi = std::sqrt(t) + diameter(m);
    double fhi = f(hi);
    double lo = 0.0625 * hi, flo = f(lo);
    // I(y) <= 1/y^2, so the upper end is always valid; walk the lower end down.
    while (flo <= 0.0) {
        hi = lo;
        fhi = flo;
        lo *= 0.0625;
        if (lo < 1e-300) return 0.0;
        flo = f(lo);
    }
    return bracketed_root(f, lo, hi, flo, fhi, 1e-13);
}

std::complex<double> biane_h(const Measure& m, double t, std::complex<double> z) {
    return z + t * stieltjes(m, z);
}

double evolve_point(const Measure& m, double t, double x) {
    const double y = biane_y(m, t, x);
    if (y == 0.0) return x + t * stieltjes(m, {x, 0.0}).real();
    const auto h = biane_h(m, t, {x, y});
    if (std::abs(h.imag()) > 1e-8) {
        std::ostringstream msg;
        msg << "Phi_t has imaginary residue " << h.imag() << " at x = " << x;
        throw ConvergenceError(msg.str());
    }
    return h.real();
}

// --------------------------------------------------------------- BianeState

BianeState::BianeState(Measure m, double t, double lo, double hi, std::size_t points,
                       std::optional<double> focus)
    : m_(std::move(m)), t_(t) {
    if (!(t > 0.0)) throw DomainError("BianeState needs t > 0");
    if (!(lo < hi) || points < 2) throw DomainError("BianeState needs lo < hi and at least two points");
    std::vector<double> xs;
    for (std::size_t i = 0; i < points; ++i) xs.push_back(lo + (hi - lo) * i / (points - 1));
    if (focus && *focus > lo && *focus < hi) {
        xs.push_back(*focus);
        for (double h = (hi - lo) / (points - 1); h >= 1e-8; h *= 0.5) {
            if (*focus - h > lo) xs.push_back(*focus - h);
            if (*focus + h < hi) xs.push_back(*focus + h);
        }
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    grid_.reserve(xs.size());
    for (double x : xs) grid_.push_back(at(x));
    for (std::size_t i = 1; i < grid_.size(); ++i) {
        const double slack = 1e-12 * (1.0 + std::abs(grid_[i].phi));
        if (grid_[i].phi < grid_[i - 1].phi - slack) {
            std::ostringstream msg;
            msg << "Phi_t not increasing between x = " << grid_[i - 1].x << " and " << grid_[i].x;
            throw ConvergenceError(msg.str());
        }
    }
}

BianePoint BianeState::at(double x) const {
    const double y = biane_y(m_, t_, x);
    if (y > 0.0) {
        const double resid = inverse_square_integral(m_, x, y) - 1.0 / t_;
        if (std::abs(resid) > 1e-10 / t_) {
            std::ostringstream msg;
            msg << "height equation residual " << resid << " at x = " << x;
            throw ConvergenceError(msg.str());
        }
    }
    const double phi = y == 0.0 ? x + t_ * stieltjes(m_, {x, 0.0}).real() : biane_h(m_, t_, {x, y}).real();
    return {x, y, phi};
}

double BianeState::inverse(double xi) const {
    if (!(xi >= phi_min() && xi <= phi_max())) {
        std::ostringstream msg;
        msg << "xi = " << xi << " outside the grid image [" << phi_min() << ", " << phi_max() << "]";
        throw RangeError(msg.str());
    }
    auto it = std::lower_bound(grid_.begin(), grid_.end(), xi,
                               [](const BianePoint& p, double v) { return p.phi < v; });
    if (it == grid_.begin()) return it->x;
    const auto& R = *it;
    const auto& L = *(it - 1);
    auto f = [&](double x) { return evolve_point(m_, t_, x) - xi; };
    const double fl = L.phi - xi, fr = R.phi - xi;
    if (fl >= 0.0) return L.x;
    if (fr <= 0.0) return R.x;
    // Absolute floor: Phi is flat at critical points, x near 0 is common.
    auto g = [&](double a, double b) { return std::abs(b - a) <= 1e-14 * (1.0 + std::abs(a)); };
    std::uintmax_t iter = kMaxRootIter;
    const auto r = boost::math::tools::toms748_solve(f, L.x, R.x, fl, fr, g, iter);
    return 0.5 * (r.first + r.second);
}

double BianeState::density(double xi) const {
    const double x = inverse(xi);
    return biane_y(m_, t_, x) / (std::numbers::pi * t_);
}

double density_at(const Measure& m, double t, double xi) {
    const auto [a, b] = support_hull(m);
    const double pad = 4.0 * std::sqrt(t) + 1.0;
    BianeState st(m, t, std::min(a, xi) - pad, std::max(b, xi) + pad, 9);
    return st.density(xi);
}

double critical_time(const Measure& m, double x) {
    const double i0 = inverse_square_integral(m, x, 0.0);
    if (!std::isfinite(i0)) return 0.0;
    return 1.0 / i0;
}

PathPoint critical_path(const CriticalFrame& f, double t) { return {f.x_star + t * f.G0, t > f.t_cr}; }

CriticalFrame classify(const Measure& m, double x_star, double kappa, double tol) {
    if (!(kappa > 2.0)) throw DomainError("classification needs kappa > 2");
    CriticalFrame f;
    f.x_star = x_star;
    f.kappa = kappa;
    const auto g = stieltjes_derivs(m, x_star, kappa > 3.0 ? 3 : 2);
    f.G0 = g.G0;
    f.G1 = g.G1;
    f.G2 = g.G2;
    f.G3 = g.G3;
    if (!(f.G1 < 0.0)) throw DomainError("G1 must be negative at a critical point");
    f.t_cr = -1.0 / f.G1;
    if (tol < 0.0) tol = 1e-9 * std::max(1.0, std::isnan(f.G3) ? 1.0 : std::pow(std::abs(f.G3), 2.0 / 3.0));
    if (std::abs(f.G2) > tol) {
        f.regime = f.G2 > 0.0 ? Regime::AiryRight : Regime::AiryLeft;
        f.scale = std::cbrt(2.0) / (std::cbrt(std::abs(f.G2)) * f.t_cr);
        return f;
    }
    if (!(kappa > 3.0)) throw DomainError("indeterminate regime: G2 vanishes but kappa <= 3");
    if (!(f.G3 < 0.0)) throw DomainError("Pearcey branch needs G3 < 0");
    f.regime = Regime::Pearcey;
    f.scale = std::pow(6.0 / (-f.G3), 0.25) / f.t_cr;
    return f;
}

CriticalFrame classify(const DensitySpec& d, double tol) { return classify(d, d.x_star(), d.kappa(), tol); }

FramePoint frame_maps(const CriticalFrame& f, double n, double tau) {
    if (!(n >= 1.0)) throw DomainError("frame_maps needs n >= 1");
    const double t = f.t_cr + f.time_offset(n, tau);
    if (!(t > 0.0)) throw DomainError("t_n(tau) <= 0: tau too negative for this n");
    return {t, f.x_star + t * f.G0};
}

// ------------------------------------------------------------ local exponent

LocalFit fit_local_exponent(const Measure& m, double t, double center, int side, double d_max,
                            double d_min, double alpha_ref) {
    const auto [a, b] = support_hull(m);
    const double pad = 4.0 * std::sqrt(t) + 1.0;
    BianeState st(m, t, a - pad, b + pad, 65);
    LocalFit fit;
    fit.alpha_ref = alpha_ref;
    std::vector<int> sides = side == 0 ? std::vector<int>{-1, 1} : std::vector<int>{side};
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    std::vector<double> slopes;
    for (int s : sides) {
        double prev_lx = 0, prev_ly = 0;
        bool have_prev = false;
        for (double d = d_max; d >= d_min * (1 - 1e-12); d *= 0.5) {
            const double v = st.density(center + s * d);
            fit.offsets.push_back(s * d);
            fit.values.push_back(v);
            if (!(v > 0.0)) continue;
            const double lx = std::log(d), ly = std::log(v);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++cnt;
            if (have_prev) slopes.push_back((ly - prev_ly) / (lx - prev_lx));
            prev_lx = lx;
            prev_ly = ly;
            have_prev = true;
        }
    }
    if (cnt < 3) throw DomainError("density vanishes on the fit window; no exponent");
    fit.alpha = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    // Smallest offset on each side.
    double pre = 0;
    int pre_cnt = 0;
    for (std::size_t i = 0; i < fit.offsets.size(); ++i) {
        const bool last_of_side = i + 1 == fit.offsets.size() ||
                                  (fit.offsets[i + 1] > 0) != (fit.offsets[i] > 0);
        if (last_of_side && fit.values[i] > 0) {
            pre += fit.values[i] / std::pow(std::abs(fit.offsets[i]), alpha_ref);
            ++pre_cnt;
        }
    }
    fit.prefactor = pre / std::max(pre_cnt, 1);
    // Local slopes should drift towards the limit from one side only.
    int ups = 0, downs = 0;
    for (std::size_t i = 1; i < slopes.size(); ++i) {
        const double dlt = slopes[i] - slopes[i - 1];
        if (dlt > 1e-6) ++ups;
        if (dlt < -1e-6) ++downs;
    }
    fit.monotone = ups == 0 || downs == 0;
    return fit;
}

LocalFit local_exponent(const Measure& m, const CriticalFrame& f) {
    const double center = f.x_star + f.t_cr * f.G0;
    if (f.airy()) {
        const int side = f.regime == Regime::AiryRight ? -1 : 1;
        return fit_local_exponent(m, f.t_cr, center, side, 1e-4, 1e-8, 0.5);
    }
    return fit_local_exponent(m, f.t_cr, center, 0, 1e-5, 1e-9, 1.0 / 3.0);
}

} // namespace nibm
