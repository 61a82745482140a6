#include "nibm/kernels_limit.hpp"

#include "nibm/error.hpp"
#include "nibm/kernels_finite.hpp"
#include "nibm/quadrature.hpp"

#include <boost/math/special_functions/airy.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

namespace nibm {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr double kAi0 = 0.35502805388781723926;   // Ai(0)
constexpr double kAip0 = -0.25881940379280679840; // Ai'(0)
constexpr double kSeriesRange = 2.5;

void check_arg(double x) {
    if (x < -50.0) {
        std::ostringstream msg;
        msg << "Ai argument " << x << " below -50";
        throw RangeError(msg.str());
    }
}

// ------------------------------------------------------------ ray contours

// Nodes z and weights dz (GL weight times the oriented direction).
struct Path {
    std::vector<cd> z, w;
};

std::vector<double> ray_breaks(double R, const RayQuadrature& rq) {
    std::vector<double> b{0.0};
    for (double r = rq.delta0 / 16; r < rq.panel && r < R; r *= 2.0) b.push_back(r);
    for (double r = rq.panel; r < R; r += rq.panel) b.push_back(r);
    b.push_back(R);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

// Ray vertex + r dir, r in [0, R]; incoming rays run towards the vertex.
void add_ray(Path& p, cd vertex, cd dir, double R, bool incoming, const RayQuadrature& rq) {
    const auto& gl = quad::gauss_legendre(rq.per_panel);
    const auto br = ray_breaks(R, rq);
    const cd orient = incoming ? -dir : dir;
    for (std::size_t k = 0; k + 1 < br.size(); ++k) {
        const double a = br[k], h = 0.5 * (br[k + 1] - br[k]);
        for (std::size_t i = 0; i < gl.size(); ++i) {
            p.z.push_back(vertex + (a + h * (1.0 + gl.x[i])) * dir);
            p.w.push_back(orient * (h * gl.w[i]));
        }
    }
}

using Exponent = std::function<cd(cd, double)>;

// Smallest radius (on a 0.25 lattice, at least 2) past which the exponent
// along every ray stays 40 below its running maximum, for every parameter.
double truncation(const std::vector<std::pair<cd, cd>>& rays, const Exponent& f, const std::vector<double>& params) {
    double R = 2.0;
    for (const auto& [vertex, dir] : rays)
        for (double p : params) {
            double peak = -1e300;
            for (double r = 0.0;; r += 0.25) {
                const double e = f(vertex + r * dir, p).real();
                peak = std::max(peak, e);
                if (r >= 2.0 && e < peak - 40.0) {
                    R = std::max(R, r);
                    break;
                }
                if (r > 60.0) throw ConvergenceError("ray exponent does not decay; parameters out of range");
            }
        }
    return R;
}

// (1/(2 pi i)^2) sum_a sum_b e^{fz(z_a, v)} e^{fw(w_b, u)} / (z_a - w_b) on
// the (us x vs) grid.
Eigen::MatrixXcd double_integral(const Path& zp, const Exponent& fz, const std::vector<double>& vs, const Path& wp,
                                 const Exponent& fw, const std::vector<double>& us) {
    const Eigen::Index na = zp.z.size(), nb = wp.z.size();
    Eigen::MatrixXcd Z(vs.size(), na), W(nb, us.size()), M(na, nb);
    for (std::size_t k = 0; k < vs.size(); ++k)
        for (Eigen::Index a = 0; a < na; ++a) Z(k, a) = zp.w[a] * std::exp(fz(zp.z[a], vs[k]));
    for (std::size_t i = 0; i < us.size(); ++i)
        for (Eigen::Index b = 0; b < nb; ++b) W(b, i) = wp.w[b] * std::exp(fw(wp.z[b], us[i]));
    for (Eigen::Index a = 0; a < na; ++a)
        for (Eigen::Index b = 0; b < nb; ++b) M(a, b) = 1.0 / (zp.z[a] - wp.z[b]);
    const cd pref = 1.0 / (cd(0, 2 * kPi) * cd(0, 2 * kPi));
    return pref * (Z * M * W).transpose();
}

cd polar(double angle) { return std::polar(1.0, angle); }

// ------------------------------------------------------------------ Airy

Eigen::MatrixXcd airy_raw(double tau1, double tau2, const std::vector<double>& us, const std::vector<double>& vs,
                          const RayQuadrature& rq) {
    const Exponent fz = [tau2](cd z, double v) { return z * z * z / 3.0 - z * v - tau2 * z * z; };
    const Exponent fw = [tau1](cd w, double u) { return -w * w * w / 3.0 + w * u + tau1 * w * w; };
    const cd zv = 0.0, wv = -rq.delta0;
    const std::vector<std::pair<cd, cd>> zr{{zv, polar(kPi / 3)}, {zv, polar(-kPi / 3)}};
    const std::vector<std::pair<cd, cd>> wr{{wv, polar(2 * kPi / 3)}, {wv, polar(-2 * kPi / 3)}};
    const double Rz = rq.radius_scale * truncation(zr, fz, vs);
    const double Rw = rq.radius_scale * truncation(wr, fw, us);
    Path zp, wp;
    add_ray(zp, zv, polar(-kPi / 3), Rz, true, rq); // in from infinity e^{-i pi/3}
    add_ray(zp, zv, polar(kPi / 3), Rz, false, rq);
    add_ray(wp, wv, polar(-2 * kPi / 3), Rw, true, rq);
    add_ray(wp, wv, polar(2 * kPi / 3), Rw, false, rq);
    return double_integral(zp, fz, vs, wp, fw, us);
}

// --------------------------------------------------------------- Pearcey

Exponent pearcey_fz(double tau2) {
    return [tau2](cd z, double v) {
        const cd z2 = z * z;
        return -z2 * z2 / 4.0 - tau2 * z2 / 2.0 - v * z;
    };
}
Exponent pearcey_fw(double tau1) {
    return [tau1](cd w, double u) {
        const cd w2 = w * w;
        return w2 * w2 / 4.0 + tau1 * w2 / 2.0 + u * w;
    };
}

Eigen::MatrixXcd pearcey_raw(double tau1, double tau2, const std::vector<double>& us, const std::vector<double>& vs,
                             const RayQuadrature& rq) {
    const auto fz = pearcey_fz(tau2);
    const auto fw = pearcey_fw(tau1);
    const cd up = polar(kPi / 2);
    const cd right = rq.delta0, left = -rq.delta0;
    const std::vector<std::pair<cd, cd>> zr{{0.0, up}, {0.0, -up}};
    const std::vector<std::pair<cd, cd>> wr{
        {right, polar(kPi / 4)}, {right, polar(-kPi / 4)}, {left, polar(3 * kPi / 4)}, {left, polar(-3 * kPi / 4)}};
    const double Rz = rq.radius_scale * truncation(zr, fz, vs);
    const double Rw = rq.radius_scale * truncation(wr, fw, us);
    Path zp, wp;
    add_ray(zp, 0.0, -up, Rz, true, rq); // upward along the imaginary axis
    add_ray(zp, 0.0, up, Rz, false, rq);
    add_ray(wp, right, polar(kPi / 4), Rw, true, rq);
    add_ray(wp, right, polar(-kPi / 4), Rw, false, rq);
    add_ray(wp, left, polar(-3 * kPi / 4), Rw, true, rq);
    add_ray(wp, left, polar(3 * kPi / 4), Rw, false, rq);
    return double_integral(zp, fz, vs, wp, fw, us);
}

// Single-ray-family integral sum of w e^{f(z)} over a fixed path.
cd path_integral(const Path& p, const std::function<cd(cd)>& f) {
    cd acc = 0;
    for (std::size_t i = 0; i < p.z.size(); ++i) acc += p.w[i] * std::exp(f(p.z[i]));
    return acc;
}

} // namespace

// ------------------------------------------------------------- Airy function

double airy_ai(double x) {
    check_arg(x);
    if (std::abs(x) > kSeriesRange) return boost::math::airy_ai(x);
    const double x3 = x * x * x;
    double f = 1.0, g = x, a = 1.0, b = x;
    for (int k = 1; k < 60; ++k) {
        a *= x3 / ((3.0 * k - 1.0) * (3.0 * k));
        b *= x3 / ((3.0 * k) * (3.0 * k + 1.0));
        f += a;
        g += b;
        if (std::abs(a) + std::abs(b) < 1e-18 * (std::abs(f) + std::abs(g))) break;
    }
    return kAi0 * f + kAip0 * g;
}

double airy_ai_prime(double x) {
    check_arg(x);
    if (std::abs(x) > kSeriesRange) return boost::math::airy_ai_prime(x);
    const double x3 = x * x * x;
    // e_k = a_k / x, h_k = b_k / x with a_k, b_k the terms of airy_ai.
    double fp = 0.0, gp = 1.0, e = x * x / 6.0, h = 1.0;
    fp += 3.0 * e;
    for (int k = 1; k < 60; ++k) {
        if (k > 1) e *= x3 / ((3.0 * k - 1.0) * (3.0 * k));
        h *= x3 / ((3.0 * k) * (3.0 * k + 1.0));
        if (k > 1) fp += 3.0 * k * e;
        gp += (3.0 * k + 1.0) * h;
        if (std::abs(e) + std::abs(h) < 1e-18 * (std::abs(fp) + std::abs(gp))) break;
    }
    return kAi0 * fp + kAip0 * gp;
}

// ------------------------------------------------------------- heat parts

double airy_heat(double tau1, double tau2, double u, double v) {
    if (!(tau1 > tau2)) return 0.0;
    return heat_kernel(2.0 * (tau1 - tau2), u - v);
}

double pearcey_heat(double tau1, double tau2, double u, double v) {
    if (!(tau1 > tau2)) return 0.0;
    return heat_kernel(tau1 - tau2, u - v);
}

// ------------------------------------------------------------ Airy kernel

Eigen::MatrixXd airy_kernel_grid(double tau1, double tau2, const std::vector<double>& us,
                                 const std::vector<double>& vs, const RayQuadrature& rq) {
    const Eigen::MatrixXcd raw = airy_raw(tau1, tau2, us, vs, rq);
    Eigen::MatrixXd out = raw.real();
    if (tau1 > tau2)
        for (std::size_t i = 0; i < us.size(); ++i)
            for (std::size_t k = 0; k < vs.size(); ++k) out(i, k) -= airy_heat(tau1, tau2, us[i], vs[k]);
    return out;
}

double airy_kernel(double tau1, double tau2, double u, double v, const RayQuadrature& rq) {
    return airy_kernel_grid(tau1, tau2, {u}, {v}, rq)(0, 0);
}

double airy_kernel_rep2(double tau1, double tau2, double u, double v) {
    const double dt = tau2 - tau1;
    auto f = [&](double r) { return std::exp(-r * dt) * airy_ai(u + r) * airy_ai(v + r); };
    // Integrate until the Airy decay has eaten the exponential weight.
    double R = 1.0;
    auto log_bound = [&](double r) {
        const double a = std::max(u + r, 0.0), b = std::max(v + r, 0.0);
        return -(2.0 / 3.0) * (std::pow(a, 1.5) + std::pow(b, 1.5)) - r * dt;
    };
    while (!(u + R > 1.0 && v + R > 1.0 && log_bound(R) < -60.0)) R += 1.0;
    std::vector<double> breaks;
    for (double r = 0.0; r < R; r += 1.0) breaks.push_back(r);
    breaks.push_back(R);
    if (-u > 0 && -u < R) breaks.push_back(-u);
    if (-v > 0 && -v < R) breaks.push_back(-v);
    double val = quad::adaptive_pieces(f, breaks, 1e-13, 1e-3);
    if (dt < 0.0) {
        const double a = -dt;
        val -= std::exp(-(u - v) * (u - v) / (4.0 * a) - 0.5 * a * (u + v) + a * a * a / 12.0) /
               std::sqrt(4.0 * kPi * a);
    }
    return val;
}

double airy_conjugation_factor(double tau1, double tau2, double u, double v) {
    return std::exp(-tau1 * u + tau2 * v + (tau1 * tau1 * tau1 - tau2 * tau2 * tau2) / 3.0);
}

double airy_kernel_via_rep2(double tau1, double tau2, double u, double v) {
    const double us = u + tau1 * tau1, vs = v + tau2 * tau2;
    return airy_kernel_rep2(tau1, tau2, us, vs) / airy_conjugation_factor(tau1, tau2, us, vs);
}

// --------------------------------------------------------- Pearcey kernel

Eigen::MatrixXd pearcey_kernel_grid(double tau1, double tau2, const std::vector<double>& us,
                                    const std::vector<double>& vs, const RayQuadrature& rq) {
    const Eigen::MatrixXcd raw = pearcey_raw(tau1, tau2, us, vs, rq);
    Eigen::MatrixXd out = raw.real();
    if (tau1 > tau2)
        for (std::size_t i = 0; i < us.size(); ++i)
            for (std::size_t k = 0; k < vs.size(); ++k) out(i, k) -= pearcey_heat(tau1, tau2, us[i], vs[k]);
    return out;
}

double pearcey_kernel(double tau1, double tau2, double u, double v, const RayQuadrature& rq) {
    return pearcey_kernel_grid(tau1, tau2, {u}, {v}, rq)(0, 0);
}

std::complex<double> pearcey_integral_raw(double tau1, double tau2, double u, double v, const RayQuadrature& rq) {
    return pearcey_raw(tau1, tau2, {u}, {v}, rq)(0, 0);
}

double pearcey_kernel_split(double tau1, double tau2, double u, double v) {
    // For zeta on the imaginary axis and omega right of it,
    //   1/(zeta - omega) = -int_0^inf e^{s (zeta - omega)} ds,
    // and for omega left of it
    //   1/(zeta - omega) =  int_0^inf e^{-s (zeta - omega)} ds.
    RayQuadrature rq;
    rq.delta0 = 0.05; // nothing singular at the vertex here
    rq.panel = 0.125;
    const auto fz = pearcey_fz(tau2);
    const auto fw = pearcey_fw(tau1);
    const cd up = polar(kPi / 2);
    const double S = 16.0;
    const std::vector<double> ps{v - S, v, v + S, u - S, u, u + S};
    const std::vector<std::pair<cd, cd>> zr{{0.0, up}, {0.0, -up}};
    const std::vector<std::pair<cd, cd>> wr{
        {0.0, polar(kPi / 4)}, {0.0, polar(-kPi / 4)}, {0.0, polar(3 * kPi / 4)}, {0.0, polar(-3 * kPi / 4)}};
    const double Rz = truncation(zr, fz, ps), Rw = truncation(wr, fw, ps);
    Path zline, wright, wleft;
    add_ray(zline, 0.0, -up, Rz, true, rq);
    add_ray(zline, 0.0, up, Rz, false, rq);
    add_ray(wright, 0.0, polar(kPi / 4), Rw, true, rq);
    add_ray(wright, 0.0, polar(-kPi / 4), Rw, false, rq);
    add_ray(wleft, 0.0, polar(-3 * kPi / 4), Rw, true, rq);
    add_ray(wleft, 0.0, polar(3 * kPi / 4), Rw, false, rq);
    auto part = [&](double s) {
        const cd fr = path_integral(zline, [&](cd z) { return fz(z, v - s); });
        const cd gr = path_integral(wright, [&](cd w) { return fw(w, u - s); });
        const cd fl = path_integral(zline, [&](cd z) { return fz(z, v + s); });
        const cd gl = path_integral(wleft, [&](cd w) { return fw(w, u + s); });
        return -fr * gr + fl * gl;
    };
    std::vector<double> breaks;
    for (double s = 0.0; s <= S; s += 0.5) breaks.push_back(s);
    const double re = quad::adaptive_pieces([&](double s) { return part(s).real(); }, breaks, 1e-13, 1e-2);
    const cd pref = 1.0 / (cd(0, 2 * kPi) * cd(0, 2 * kPi));
    // The integral is real up to quadrature noise, so only the real part of
    // pref * (...) is needed, and pref is real.
    return pref.real() * re - pearcey_heat(tau1, tau2, u, v);
}

} // namespace nibm
