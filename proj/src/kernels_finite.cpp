#include "nibm/kernels_finite.hpp"

#include "mp.hpp"
#include "nibm/error.hpp"
#include "nibm/quadrature.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

namespace nibm {

namespace {

constexpr double kDetectorRatio = 1e-10;
constexpr long kGuardBits = 64;
constexpr int kMaxAttempts = 8;

// Gauss-Hermite count that integrates degree n-1 exactly.
std::size_t hermite_count(std::size_t n) { return (n + 1) / 2 + 1; }

// Non-negative half of the double rule; positive nodes carry their mirror.
struct HalfRule {
    std::vector<double> x, w;
};

HalfRule half_rule(std::size_t m) {
    const auto& r = quad::gauss_hermite(m);
    HalfRule h;
    for (std::size_t i = m / 2; i < m; ++i) {
        const bool centre = (m % 2 == 1) && i == m / 2;
        h.x.push_back(centre ? 0.0 : r.x[i]);
        h.w.push_back(centre ? r.w[i] : 2.0 * r.w[i]);
    }
    return h;
}

struct Neumaier {
    double s = 0, c = 0;
    void add(double v) {
        const double t = s + v;
        c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

long round_bits(long b) { return ((b + 63) / 64) * 64; }

long exponent_of(mpfr_srcptr v) {
    return mpfr_zero_p(v) ? std::numeric_limits<long>::min() / 4 : static_cast<long>(mpfr_get_exp(v));
}

void check_times(double s, double t) {
    if (!(s > 0.0) || !(t > 0.0)) throw DomainError("kernel times must be positive");
}

} // namespace

Precision parse_precision(const std::string& name) {
    if (name == "double") return Precision::Double;
    if (name == "compensated") return Precision::Compensated;
    if (name == "extended") return Precision::Extended;
    if (name == "auto") return Precision::Auto;
    throw ConfigError("unknown precision policy '" + name + "' (double, compensated, extended, auto)");
}

const char* precision_name(Precision p) {
    switch (p) {
    case Precision::Double: return "double";
    case Precision::Compensated: return "compensated";
    case Precision::Extended: return "extended";
    case Precision::Auto: return "auto";
    }
    return "?";
}

double heat_kernel(double var, double dx) {
    return std::exp(-dx * dx / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

// ------------------------------------------------------------- ResidueTable

ResidueTable::ResidueTable(const EmpiricalMeasure& mn) : log_mag_(mn.size(), 0.0), sign_(mn.size(), 1) {
    const auto& x = mn.atoms();
    for (std::size_t j = 0; j < x.size(); ++j) {
        Neumaier acc;
        // Atoms are sorted, so the sign is (-1)^(number of atoms above j).
        for (std::size_t k = 0; k < x.size(); ++k)
            if (k != j) acc.add(std::log(std::abs(x[j] - x[k])));
        log_mag_[j] = acc.value();
        sign_[j] = ((x.size() - 1 - j) % 2 == 0) ? 1 : -1;
    }
}

double ResidueTable::verify(const EmpiricalMeasure& mn) const {
    const auto& x = mn.atoms();
    double worst = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        double direct = 0.0;
        int sg = 1;
        for (std::size_t k = 0; k < x.size(); ++k) {
            if (k == j) continue;
            direct += std::log(std::abs(x[j] - x[k]));
            if (x[j] < x[k]) sg = -sg;
        }
        if (sg != sign_[j]) return std::numeric_limits<double>::infinity();
        worst = std::max(worst, std::abs(direct - log_mag_[j]));
    }
    return worst;
}

// ------------------------------------------------------------- FiniteKernel

struct FiniteKernel::Impl {
    std::size_t n;
    std::vector<double> atoms;
    HalfRule rule;
    std::mutex mu;
    std::map<long, std::shared_ptr<const mp::Array>> residues; // signed 1/prod_{k!=j}(x_j - x_k)
    std::atomic<long> last_bits{0};

    // --- log-domain path (Double, Compensated) ---

    struct LogColumn {
        std::vector<double> b, c; // [j * h + i]
    };

    LogColumn log_column(double t, double y, double g) const {
        const std::size_t h = rule.x.size();
        LogColumn col;
        col.b.assign(n * h, -std::numeric_limits<double>::infinity());
        col.c.assign(n * h, 0.0);
        const double nn = static_cast<double>(n);
        const double scale = std::sqrt(2.0 * t / nn);
        const double common = std::log(scale) - nn * g * y + 0.5 * nn * g * g * t;
        for (std::size_t i = 0; i < h; ++i) {
            const double sigma = scale * rule.x[i];
            double log_p = 0.0, arg_p = 0.0;
            std::ptrdiff_t zero_at = -1;
            for (std::size_t k = 0; k < n; ++k) {
                const double d = y - atoms[k];
                if (d == 0.0 && sigma == 0.0) {
                    zero_at = static_cast<std::ptrdiff_t>(k);
                    continue;
                }
                log_p += 0.5 * std::log(d * d + sigma * sigma);
                arg_p += std::atan2(sigma, d);
            }
            const double lw = std::log(rule.w[i]) + common;
            for (std::size_t j = 0; j < n; ++j) {
                const std::size_t idx = j * h + i;
                if (zero_at >= 0) {
                    if (static_cast<std::ptrdiff_t>(j) != zero_at) continue;
                    col.b[idx] = lw + log_p;
                    col.c[idx] = std::cos(arg_p);
                    continue;
                }
                const double d = y - atoms[j];
                col.b[idx] = lw + log_p - 0.5 * std::log(d * d + sigma * sigma);
                col.c[idx] = std::cos(arg_p - std::atan2(sigma, d));
            }
        }
        return col;
    }

    std::vector<double> log_row(const ResidueTable& tab, double s, double x, double g) const {
        const double nn = static_cast<double>(n);
        std::vector<double> a(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double d = atoms[j] - x;
            a[j] = -nn * d * d / (2.0 * s) + nn * g * x - 0.5 * nn * g * g * s - tab.log_magnitude(j);
        }
        return a;
    }

    Eigen::MatrixXd log_grid(const ResidueTable& tab, bool compensated, double s, const std::vector<double>& xs,
                             double t, const std::vector<double>& ys, double g, double& worst_digits) const {
        const std::size_t h = rule.x.size();
        std::vector<LogColumn> cols(ys.size());
        detail::parallel_for(ys.size(), [&](std::size_t k) { cols[k] = log_column(t, ys[k], g); });
        std::vector<std::vector<double>> rows(xs.size());
        for (std::size_t r = 0; r < xs.size(); ++r) rows[r] = log_row(tab, s, xs[r], g);
        const double pref = static_cast<double>(n) / (2.0 * std::numbers::pi * std::sqrt(s * t));
        Eigen::MatrixXd out(xs.size(), ys.size());
        std::vector<double> digits(ys.size(), 0.0);
        detail::parallel_for(ys.size(), [&](std::size_t k) {
            const auto& col = cols[k];
            for (std::size_t r = 0; r < xs.size(); ++r) {
                const auto& a = rows[r];
                Neumaier comp;
                double plain = 0.0, biggest = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    const double sg = tab.sign(j);
                    for (std::size_t i = 0; i < h; ++i) {
                        const std::size_t idx = j * h + i;
                        const double v = sg * std::exp(a[j] + col.b[idx]) * col.c[idx];
                        biggest = std::max(biggest, std::abs(v));
                        if (compensated)
                            comp.add(v);
                        else
                            plain += v;
                    }
                }
                const double sum = compensated ? comp.value() : plain;
                const double dg = biggest > 0.0 ? std::log10(biggest / std::abs(sum)) : 0.0;
                digits[k] = std::max(digits[k], dg);
                if (std::abs(sum) < kDetectorRatio * biggest) {
                    std::ostringstream msg;
                    msg << "residue sum cancels " << dg << " digits at x = " << xs[r] << ", y = " << ys[k]
                        << "; use the extended precision policy";
                    throw PrecisionError(msg.str(), dg);
                }
                out(r, k) = pref * sum;
            }
        });
        for (double d : digits) worst_digits = std::max(worst_digits, d);
        return out;
    }

    // --- MPFR path (Extended) ---

    std::shared_ptr<const mp::Array> residue_array(long bits) {
        std::lock_guard<std::mutex> lock(mu);
        auto it = residues.find(bits);
        if (it != residues.end()) return it->second;
        auto arr = std::make_shared<mp::Array>(n, bits);
        mp::Scalar d(bits);
        for (std::size_t j = 0; j < n; ++j) {
            mpfr_set_ui((*arr)[j], 1, mp::kRnd);
            for (std::size_t k = 0; k < n; ++k) {
                if (k == j) continue;
                mpfr_set_d(d, atoms[j], mp::kRnd);
                mpfr_sub_d(d, d, atoms[k], mp::kRnd);
                mpfr_mul((*arr)[j], (*arr)[j], d, mp::kRnd);
            }
            mpfr_ui_div((*arr)[j], 1, (*arr)[j], mp::kRnd);
        }
        residues[bits] = arr;
        return arr;
    }

    struct MpColumn {
        mp::Array B;
        std::vector<long> top; // largest exponent among the terms of B_j
    };

    MpColumn mp_column(long bits, const mp::HermiteHalf& hr, double t, double y, double g) const {
        const std::size_t h = hr.nodes.size();
        MpColumn col{mp::Array(n, bits), std::vector<long>(n, std::numeric_limits<long>::min() / 4)};
        mp::Scalar scale(bits), common(bits), tmp(bits), tmp2(bits), num(bits), den(bits);
        mp::Array sigma(h, bits), sigma2(h, bits), pr(h, bits), pi(h, bits), d(n, bits), d2(n, bits);
        const double nn = static_cast<double>(n);
        // scale = sqrt(2 t / n)
        mpfr_set_d(scale, t, mp::kRnd);
        mpfr_mul_ui(scale, scale, 2, mp::kRnd);
        mpfr_div_ui(scale, scale, n, mp::kRnd);
        mpfr_sqrt(scale, scale, mp::kRnd);
        // common = scale * exp(-n g y + n g^2 t / 2)
        mpfr_set_d(common, g, mp::kRnd);
        mpfr_mul_d(common, common, t, mp::kRnd);
        mpfr_mul_d(common, common, 0.5, mp::kRnd);
        mpfr_sub_d(common, common, y, mp::kRnd);
        mpfr_mul_d(common, common, g, mp::kRnd);
        mpfr_mul_d(common, common, nn, mp::kRnd);
        mpfr_exp(common, common, mp::kRnd);
        mpfr_mul(common, common, scale, mp::kRnd);
        const long common_exp = exponent_of(common);
        for (std::size_t k = 0; k < n; ++k) {
            mpfr_set_d(d[k], y, mp::kRnd);
            mpfr_sub_d(d[k], d[k], atoms[k], mp::kRnd);
            mpfr_sqr(d2[k], d[k], mp::kRnd);
        }
        std::ptrdiff_t zero_at = -1;
        std::size_t zero_node = h;
        for (std::size_t i = 0; i < h; ++i) {
            mpfr_mul(sigma[i], scale, hr.nodes[i], mp::kRnd);
            mpfr_sqr(sigma2[i], sigma[i], mp::kRnd);
            mpfr_set_ui(pr[i], 1, mp::kRnd);
            mpfr_set_ui(pi[i], 0, mp::kRnd);
            for (std::size_t k = 0; k < n; ++k) {
                // (pr + i pi)(d + i sigma)
                mpfr_mul(tmp, pr[i], d[k], mp::kRnd);
                mpfr_mul(tmp2, pi[i], sigma[i], mp::kRnd);
                mpfr_mul(pi[i], pi[i], d[k], mp::kRnd);
                mpfr_fma(pi[i], pr[i], sigma[i], pi[i], mp::kRnd);
                mpfr_sub(pr[i], tmp, tmp2, mp::kRnd);
            }
            if (mpfr_zero_p(sigma[i]))
                for (std::size_t k = 0; k < n; ++k)
                    if (mpfr_zero_p(d[k])) {
                        zero_at = static_cast<std::ptrdiff_t>(k);
                        zero_node = i;
                    }
        }
        for (std::size_t j = 0; j < n; ++j) {
            mpfr_set_ui(col.B[j], 0, mp::kRnd);
            for (std::size_t i = 0; i < h; ++i) {
                if (i == zero_node) {
                    if (static_cast<std::ptrdiff_t>(j) != zero_at) continue;
                    // P(z)/(z - x_j) at z = x_j: the product over the other atoms.
                    mpfr_set_ui(num, 1, mp::kRnd);
                    for (std::size_t k = 0; k < n; ++k)
                        if (k != j) mpfr_mul(num, num, d[k], mp::kRnd);
                    mpfr_mul(num, num, hr.weights[i], mp::kRnd);
                } else {
                    // w Re(P / (z - x_j)) = w (pr d_j + pi sigma) / (d_j^2 + sigma^2)
                    mpfr_mul(num, pr[i], d[j], mp::kRnd);
                    mpfr_fma(num, pi[i], sigma[i], num, mp::kRnd);
                    mpfr_add(den, d2[j], sigma2[i], mp::kRnd);
                    mpfr_div(num, num, den, mp::kRnd);
                    mpfr_mul(num, num, hr.weights[i], mp::kRnd);
                }
                col.top[j] = std::max(col.top[j], exponent_of(num) + common_exp);
                mpfr_add(col.B[j], col.B[j], num, mp::kRnd);
            }
            mpfr_mul(col.B[j], col.B[j], common, mp::kRnd);
        }
        return col;
    }

    mp::Array mp_row(long bits, const mp::Array& res, double s, double x, double g) const {
        mp::Array A(n, bits);
        mp::Scalar e(bits), tmp(bits);
        const double nn = static_cast<double>(n);
        // n g x - n g^2 s / 2, shared by every j
        mp::Scalar shift(bits);
        mpfr_set_d(shift, g, mp::kRnd);
        mpfr_mul_d(shift, shift, s, mp::kRnd);
        mpfr_mul_d(shift, shift, -0.5, mp::kRnd);
        mpfr_add_d(shift, shift, x, mp::kRnd);
        mpfr_mul_d(shift, shift, g, mp::kRnd);
        mpfr_mul_d(shift, shift, nn, mp::kRnd);
        for (std::size_t j = 0; j < n; ++j) {
            mpfr_set_d(e, atoms[j], mp::kRnd);
            mpfr_sub_d(e, e, x, mp::kRnd);
            mpfr_sqr(e, e, mp::kRnd);
            mpfr_mul_d(e, e, -nn, mp::kRnd);
            mpfr_div_d(e, e, 2.0 * s, mp::kRnd);
            mpfr_add(e, e, shift, mp::kRnd);
            mpfr_exp(e, e, mp::kRnd);
            mpfr_mul(A[j], e, res[j], mp::kRnd);
        }
        return A;
    }

    // Bits lost to cancellation in one pass, and the most that could be lost
    // (largest term against the zero floor).
    struct PassLoss {
        long lost = 0, span = 0;
    };

    // One pass at fixed precision.
    PassLoss mp_grid_pass(long bits, double s, const std::vector<double>& xs, double t, const std::vector<double>& ys,
                      double g, Eigen::MatrixXd& out) {
        const auto res = residue_array(bits);
        const auto hr = mp::gauss_hermite_half(hermite_count(n), bits);
        std::vector<MpColumn> cols;
        cols.reserve(ys.size());
        for (std::size_t k = 0; k < ys.size(); ++k) cols.push_back({mp::Array(), {}});
        detail::parallel_for(ys.size(), [&](std::size_t k) { cols[k] = mp_column(bits, *hr, t, ys[k], g); });
        std::vector<mp::Array> rows(xs.size());
        detail::parallel_for(xs.size(), [&](std::size_t r) { rows[r] = mp_row(bits, *res, s, xs[r], g); });
        const double pref = static_cast<double>(n) / (2.0 * std::numbers::pi * std::sqrt(s * t));
        // Results below this (before the prefactor) count as zero when
        // measuring lost bits.
        const long floor_exp = static_cast<long>(std::floor(std::log2(1e-18 * 2.0 * std::numbers::pi)));
        out.resize(xs.size(), ys.size());
        std::vector<long> lost(ys.size(), 0), span(ys.size(), 0);
        detail::parallel_for(ys.size(), [&](std::size_t k) {
            mp::Scalar acc(bits), term(bits);
            for (std::size_t r = 0; r < xs.size(); ++r) {
                mpfr_set_ui(acc, 0, mp::kRnd);
                long top = std::numeric_limits<long>::min() / 4;
                for (std::size_t j = 0; j < n; ++j) {
                    mpfr_mul(term, rows[r][j], cols[k].B[j], mp::kRnd);
                    top = std::max(top, exponent_of(rows[r][j]) + cols[k].top[j]);
                    mpfr_add(acc, acc, term, mp::kRnd);
                }
                lost[k] = std::max(lost[k], top - std::max(exponent_of(acc), floor_exp));
                span[k] = std::max(span[k], top - floor_exp);
                out(r, k) = pref * mpfr_get_d(acc, mp::kRnd);
            }
        });
        return {*std::max_element(lost.begin(), lost.end()), *std::max_element(span.begin(), span.end())};
    }

    Eigen::MatrixXd mp_grid(double s, const std::vector<double>& xs, double t, const std::vector<double>& ys,
                            double g, KernelDiagnostics& diag) {
        long bits = std::max<long>(last_bits.load(), 2 * kGuardBits);
        Eigen::MatrixXd out;
        for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
            const auto loss = mp_grid_pass(bits, s, xs, t, ys, g, out);
            const long lost = std::max<long>(0, loss.lost);
            if (lost + kGuardBits <= bits) {
                diag.cancellation_digits = std::max(diag.cancellation_digits, lost * std::log10(2.0));
                diag.bits = std::max(diag.bits, bits);
                last_bits = std::max(last_bits.load(), bits);
                return out;
            }
            // A result that is pure noise understates the loss, so at least
            // double; span + guard is always enough.
            bits = round_bits(std::min(std::max(2 * bits, lost + 2 * kGuardBits), loss.span + 2 * kGuardBits));
        }
        throw PrecisionError("extended residue sum did not settle after raising the precision",
                             diag.cancellation_digits);
    }
};

FiniteKernel::FiniteKernel(EmpiricalMeasure mn, Precision p, double gauge)
    : mn_(std::move(mn)), table_(mn_), prec_(p), g_(gauge), impl_(std::make_unique<Impl>()) {
    if (mn_.size() == 0) throw DomainError("finite kernel needs at least one atom");
    impl_->n = mn_.size();
    impl_->atoms = mn_.atoms();
    impl_->rule = half_rule(hermite_count(mn_.size()));
}

FiniteKernel::~FiniteKernel() = default;
FiniteKernel::FiniteKernel(FiniteKernel&&) noexcept = default;
FiniteKernel& FiniteKernel::operator=(FiniteKernel&&) noexcept = default;

Eigen::MatrixXd FiniteKernel::integral_part(double s, const std::vector<double>& xs, double t,
                                            const std::vector<double>& ys, KernelDiagnostics* diag) const {
    check_times(s, t);
    KernelDiagnostics local;
    for (double y : ys)
        for (double a : mn_.atoms())
            if (std::abs(y - a) < 1e-10) local.near_atom = true;
    Eigen::MatrixXd out;
    auto run_log = [&](bool comp) {
        local.used = comp ? Precision::Compensated : Precision::Double;
        local.bits = 53;
        return impl_->log_grid(table_, comp, s, xs, t, ys, g_, local.cancellation_digits);
    };
    switch (prec_) {
    case Precision::Double: out = run_log(false); break;
    case Precision::Compensated: out = run_log(true); break;
    case Precision::Extended:
        local.used = Precision::Extended;
        out = impl_->mp_grid(s, xs, t, ys, g_, local);
        break;
    case Precision::Auto:
        try {
            out = run_log(true);
        } catch (const PrecisionError&) {
            local.used = Precision::Extended;
            local.cancellation_digits = 0;
            out = impl_->mp_grid(s, xs, t, ys, g_, local);
        }
        break;
    }
    if (diag) {
        diag->cancellation_digits = std::max(diag->cancellation_digits, local.cancellation_digits);
        diag->bits = std::max(diag->bits, local.bits);
        if (local.used == Precision::Extended || diag->used == Precision::Double) diag->used = local.used;
        diag->near_atom = diag->near_atom || local.near_atom;
    }
    return out;
}

double FiniteKernel::heat(double s, double x, double t, double y) const {
    if (!(s > t)) return 0.0;
    const double gap = s - t;
    return heat_kernel(gap / static_cast<double>(n()), x - y - g_ * gap);
}

Eigen::MatrixXd FiniteKernel::grid(double s, const std::vector<double>& xs, double t, const std::vector<double>& ys,
                                   KernelDiagnostics* diag) const {
    Eigen::MatrixXd out = integral_part(s, xs, t, ys, diag);
    if (s > t)
        for (std::size_t r = 0; r < xs.size(); ++r)
            for (std::size_t k = 0; k < ys.size(); ++k) out(r, k) -= heat(s, xs[r], t, ys[k]);
    return out;
}

double FiniteKernel::operator()(double s, double x, double t, double y, KernelDiagnostics* diag) const {
    return grid(s, {x}, t, {y}, diag)(0, 0);
}

double kernel_exact(const EmpiricalMeasure& mn, double s, double x, double t, double y, Precision p,
                    KernelDiagnostics* diag) {
    return FiniteKernel(mn, p)(s, x, t, y, diag);
}

// ----------------------------------------------------------- RescaledKernel

RescaledKernel::RescaledKernel(EmpiricalMeasure mn, CriticalFrame frame, Precision p)
    : frame_(frame), n_(static_cast<double>(mn.size())),
      unit_(frame.scale * std::pow(static_cast<double>(mn.size()), frame.space_power())),
      kernel_(std::move(mn), p, frame.G0) {}

FramePoint RescaledKernel::point(double tau, double u) const {
    const auto fp = frame_maps(frame_, n_, tau);
    return {fp.t, fp.x + u / unit_};
}

double RescaledKernel::heat(double tau1, double tau2, double u, double v) const {
    if (!(tau1 > tau2)) return 0.0;
    // s - t straight from the time offset (linear in tau), so no n-dependent
    // rounding survives.
    const double gap = frame_.time_offset(n_, tau1 - tau2);
    return heat_kernel(gap / n_, (u - v) / unit_) / unit_;
}

Eigen::MatrixXd RescaledKernel::grid(double tau1, double tau2, const std::vector<double>& us,
                                     const std::vector<double>& vs, KernelDiagnostics* diag) const {
    const auto p1 = frame_maps(frame_, n_, tau1);
    const auto p2 = frame_maps(frame_, n_, tau2);
    std::vector<double> xs, ys;
    for (double u : us) xs.push_back(p1.x + u / unit_);
    for (double v : vs) ys.push_back(p2.x + v / unit_);
    Eigen::MatrixXd out = kernel_.integral_part(p1.t, xs, p2.t, ys, diag) / unit_;
    if (tau1 > tau2)
        for (std::size_t r = 0; r < us.size(); ++r)
            for (std::size_t k = 0; k < vs.size(); ++k) out(r, k) -= heat(tau1, tau2, us[r], vs[k]);
    return out;
}

double RescaledKernel::operator()(double tau1, double tau2, double u, double v, KernelDiagnostics* diag) const {
    return grid(tau1, tau2, {u}, {v}, diag)(0, 0);
}

// ------------------------------------------------------------ saddle points

std::complex<double> saddle_points(const EmpiricalMeasure& mn, double t, double target) {
    if (!(t > 0.0)) throw DomainError("saddle_points needs t > 0");
    const double pad = 4.0 * std::sqrt(t) + 1.0;
    const BianeState st(Measure{mn}, t, mn.min() - pad, mn.max() + pad, 65);
    const double x = st.inverse(target);
    return {x, biane_y(Measure{mn}, t, x)};
}

} // namespace nibm
