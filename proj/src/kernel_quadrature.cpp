// Brute-force double contour integral for small n. Long double throughout; no
// residues, so it is an independent check on the residue evaluation.

#include "nibm/error.hpp"
#include "nibm/kernels_finite.hpp"
#include "nibm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <iomanip>
#include <sstream>

namespace nibm {

namespace {

using cld = std::complex<long double>;
constexpr long double kPi = std::numbers::pi_v<long double>;

// Closed polygon around one group of atoms: leaves the inner end (the vertex
// facing the z-line) at 45 degrees so the two contours only come close near
// that vertex, then boxes the group in at height H. Counterclockwise.
struct Lens {
    std::vector<cld> v; // vertices, v[0] = inner end

    static Lens make(long double inner, long double outer, long double H, int side) {
        // side < 0: group to the left of the line (outer < inner).
        const long double d = std::min(H, 0.5L * std::abs(inner - outer));
        const long double dir = side < 0 ? -1.0L : 1.0L;
        const long double s = side < 0 ? 1.0L : -1.0L; // first move up for left groups
        Lens l;
        l.v = {cld(inner, 0), cld(inner + dir * d, s * H), cld(outer, s * H), cld(outer, -s * H),
               cld(inner + dir * d, -s * H)};
        return l;
    }
    cld at(std::size_t seg, long double f) const { return v[seg] + f * (v[(seg + 1) % 5] - v[seg]); }
};

struct Setup {
    const std::vector<double>& atoms;
    long double n, s, t, x, y, x0;

    // log of the w-part magnitude exp(-n (w-x)^2 / (2 s)) / prod (w - x_k)
    cld log_w_part(cld w) const {
        cld acc = -n * (w - (long double)x) * (w - (long double)x) / (2.0L * s);
        for (double a : atoms) acc -= std::log(w - (long double)a);
        return acc;
    }
    cld log_z_part(cld z) const {
        cld acc = n * (z - (long double)y) * (z - (long double)y) / (2.0L * t);
        for (double a : atoms) acc += std::log(z - (long double)a);
        return acc;
    }
};

// Breakpoints on [0, len]: `panels` uniform pieces plus geometric refinement
// towards 0 from `fine` down to fine / 64.
std::vector<long double> graded(long double len, std::size_t panels, long double fine) {
    std::vector<long double> b;
    for (std::size_t i = 0; i <= panels; ++i) b.push_back(len * i / panels);
    for (long double h = std::min(fine, len / panels); h >= fine / 64; h *= 0.5L) b.push_back(h);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

struct Nodes {
    std::vector<long double> x, w;
};

Nodes composite(const std::vector<long double>& edges, std::size_t q) {
    const auto& gl = quad::gauss_legendre(q);
    Nodes out;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const long double a = edges[p], b = edges[p + 1], h = 0.5L * (b - a);
        for (std::size_t i = 0; i < gl.size(); ++i) {
            out.x.push_back(a + h * (1.0L + gl.x[i]));
            out.w.push_back(h * gl.w[i]);
        }
    }
    return out;
}

long double evaluate(const Setup& su, const std::vector<Lens>& gam, long double L, long double gap,
                     std::size_t panels, std::size_t q, long double& imag_out) {
    // z-line: sigma in [-L, L], mirrored from [0, L].
    const auto half = composite(graded(L, panels, 2.0L * gap), q);
    std::vector<cld> zs, zf;
    for (int sg : {-1, 1})
        for (std::size_t i = 0; i < half.x.size(); ++i) {
            const cld z(su.x0, sg * half.x[i]);
            zs.push_back(z);
            zf.push_back(std::exp(su.log_z_part(z)) * half.w[i] * cld(0, 1)); // dz = i dsigma
        }
    std::vector<cld> ws, wf;
    for (const auto& e : gam) {
        for (std::size_t seg = 0; seg < 5; ++seg) {
            const cld a = e.v[seg], b = e.v[(seg + 1) % 5], dw = b - a;
            const long double len = std::abs(dw);
            // The two edges at the inner vertex are graded towards it.
            const bool into = seg == 4, out_of = seg == 0;
            const auto pr = composite(graded(len, panels, out_of || into ? 2.0L * gap : len), q);
            for (std::size_t i = 0; i < pr.x.size(); ++i) {
                const long double r = into ? len - pr.x[i] : pr.x[i];
                const cld w = a + dw * (r / len);
                ws.push_back(w);
                wf.push_back(std::exp(su.log_w_part(w)) * (dw / len) * pr.w[i]);
            }
        }
    }
    cld acc = 0;
    for (std::size_t a = 0; a < zs.size(); ++a) {
        cld inner = 0;
        for (std::size_t b = 0; b < ws.size(); ++b) inner += wf[b] / (zs[a] - ws[b]);
        acc += zf[a] * inner;
    }
    const cld pref = su.n / (cld(0, 2.0L * kPi) * cld(0, 2.0L * kPi) * std::sqrt(su.s * su.t));
    const cld v = pref * acc;
    imag_out = v.imag();
    return v.real();
}

} // namespace

double kernel_quadrature(const EmpiricalMeasure& mn, double s, double x, double t, double y,
                         const ContourSpec& spec) {
    if (!(s > 0.0) || !(t > 0.0)) throw DomainError("kernel times must be positive");
    if (mn.size() == 0 || mn.size() > 64) throw DomainError("kernel_quadrature is for 1 <= n <= 64");
    const auto& atoms = mn.atoms();
    const double spread = std::max(mn.max() - mn.min(), 1.0);

    // z-line position: y itself, nudged off an atom that sits almost on it.
    // Moving far from y is not an option: the z-part grows like
    // exp(n (x0 - y)^2 / (2 t)).
    std::vector<double> pts{mn.min() - spread, mn.max() + spread};
    pts.insert(pts.end(), atoms.begin(), atoms.end());
    std::sort(pts.begin(), pts.end());
    const std::size_t up = std::upper_bound(pts.begin(), pts.end(), y) - pts.begin();
    const double lo = pts[up - 1], hi = pts[up];
    const double nudge = 1e-3 * spread;
    double x0 = y;
    if (y - lo < nudge) x0 = std::min(lo + nudge, 0.5 * (lo + hi));
    if (hi - y < nudge) x0 = std::max(hi - nudge, 0.5 * (lo + hi));
    const double gap = std::min(x0 - lo, hi - x0);
    if (!(gap > 0.0)) throw PoleError("z-line runs through an atom");

    Setup su{atoms, (long double)mn.size(), s, t, x, y, x0};

    // w-contours: one lens per side of the line.
    const double rho = 0.5 * spread;
    std::vector<Lens> gam;
    for (int side : {-1, 1}) {
        std::vector<double> group;
        for (double a : atoms)
            if ((a - x0) * side > 0) group.push_back(a);
        if (group.empty()) continue;
        const auto [gmin, gmax] = std::minmax_element(group.begin(), group.end());
        const double inner = side < 0 ? 0.5 * (*gmax + x0) : 0.5 * (*gmin + x0);
        const double outer = side < 0 ? *gmin - rho : *gmax + rho;
        // Height minimising the largest w-part along the curve.
        long double best = 1e300L, best_h = 1.0L;
        for (long double h = 0.05L; h <= 4.0L; h *= 1.25L) {
            const auto l = Lens::make(inner, outer, h, side);
            long double worst = -1e300L;
            for (std::size_t seg = 0; seg < 5; ++seg)
                for (int i = 1; i < 64; ++i) worst = std::max(worst, su.log_w_part(l.at(seg, i / 64.0L)).real());
            if (worst < best) {
                best = worst;
                best_h = h;
            }
        }
        const auto l = Lens::make(inner, outer, best_h, side);
        // Every atom of the group must sit strictly inside.
        for (double a : group)
            if (!((a - outer) * (a - inner) < 0)) throw DomainError("w-contour misses an atom");
        gam.push_back(l);
    }

    // Truncate the z-line where the integrand is negligible.
    long double peak = -1e300L;
    for (int i = 0; i <= 200; ++i) peak = std::max(peak, su.log_z_part(cld(x0, 0.05L * i * std::sqrt(t))).real());
    long double L = std::sqrt(t / mn.size());
    while (su.log_z_part(cld(x0, L)).real() > peak - 50.0L) L *= 1.25L;

    long double im1 = 0, im2 = 0;
    const long double v1 = evaluate(su, gam, L, gap, spec.panels, spec.per_panel, im1);
    const long double v2 = evaluate(su, gam, L, gap, 2 * spec.panels, spec.per_panel, im2);
    const long double diff = std::abs(v2 - v1);
    if (diff > spec.rel_tol * std::abs(v2) || std::abs(im2) > spec.rel_tol * std::max(std::abs(v2), 1e-300L)) {
        std::ostringstream msg;
        msg << "contour quadrature did not settle: " << std::setprecision(16) << (double)v1 << " vs " << (double)v2
            << ", imaginary part " << (double)im2;
        throw ConvergenceError(msg.str());
    }
    double out = static_cast<double>(v2);
    if (s > t) out -= heat_kernel((s - t) / mn.size(), x - y);
    return out;
}

} // namespace nibm
