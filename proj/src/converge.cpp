#include "nibm/converge.hpp"

#include "nibm/error.hpp"
#include "nibm/kernels_limit.hpp"

#include <cmath>
#include <sstream>

namespace nibm {

namespace {

// Rethrow a library error with context, keeping its type (and so the CLI exit
// code).
[[noreturn]] void rethrow_with(const std::string& where) {
    try {
        throw;
    } catch (const PrecisionError& e) {
        throw PrecisionError(std::string(e.what()) + where, e.cancellation_digits());
    } catch (const DomainError& e) {
        throw DomainError(e.what() + where);
    } catch (const PoleError& e) {
        throw PoleError(e.what() + where);
    } catch (const RangeError& e) {
        throw RangeError(e.what() + where);
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(e.what() + where);
    }
}

} // namespace

std::optional<double> fitted_rate(const std::vector<std::size_t>& ns, const std::vector<double>& errors) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < ns.size() && i < errors.size(); ++i)
        if (errors[i] > 0.0) {
            lx.push_back(std::log(static_cast<double>(ns[i])));
            ly.push_back(std::log(errors[i]));
        }
    if (lx.size() < 2) return std::nullopt;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= lx.size();
    my /= ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    if (sxx == 0.0) return std::nullopt;
    return -sxy / sxx;
}

ConvergeReport converge_sweep(const std::function<EmpiricalMeasure(std::size_t)>& initial,
                              const CriticalFrame& frame, const std::vector<std::size_t>& ns,
                              const std::vector<std::pair<double, double>>& taus,
                              const std::vector<double>& grid, Precision precision) {
    if (ns.empty()) throw DomainError("converge needs at least one n");
    for (std::size_t i = 1; i < ns.size(); ++i)
        if (ns[i] <= ns[i - 1]) throw DomainError("the n list must be strictly increasing");
    if (taus.empty() || grid.empty()) throw DomainError("converge needs tau pairs and a non-empty grid");

    // Limit kernels do not depend on n.
    std::vector<Eigen::MatrixXd> limits;
    for (const auto& [t1, t2] : taus)
        limits.push_back(frame.airy() ? airy_kernel_grid(t1, t2, grid, grid) : pearcey_kernel_grid(t1, t2, grid, grid));

    ConvergeReport rep;
    for (std::size_t n : ns) {
        ConvergeRow row;
        row.n = n;
        const RescaledKernel k(initial(n), frame, precision);
        for (std::size_t j = 0; j < taus.size(); ++j) {
            const auto [t1, t2] = taus[j];
            KernelDiagnostics diag;
            Eigen::MatrixXd fin;
            try {
                fin = k.grid(t1, t2, grid, grid, &diag);
            } catch (const Error&) {
                std::ostringstream where;
                where << " (n = " << n << ", tau = " << t1 << ", " << t2 << ")";
                rethrow_with(where.str());
            }
            row.cancellation_digits = std::max(row.cancellation_digits, diag.cancellation_digits);
            for (Eigen::Index a = 0; a < fin.rows(); ++a)
                for (Eigen::Index b = 0; b < fin.cols(); ++b) {
                    const double e = std::abs(fin(a, b) - limits[j](a, b));
                    if (e > row.max_abs_error) {
                        row.max_abs_error = e;
                        row.tau1 = t1;
                        row.tau2 = t2;
                        row.u = grid[a];
                        row.v = grid[b];
                    }
                }
        }
        rep.rows.push_back(row);
    }
    std::vector<double> errs;
    for (const auto& r : rep.rows) errs.push_back(r.max_abs_error);
    if (ns.size() > 1) {
        bool dec = true;
        for (std::size_t i = 1; i < errs.size(); ++i) dec = dec && errs[i] < errs[i - 1];
        rep.decreasing = dec;
    }
    rep.fitted_rate = fitted_rate(ns, errs);
    return rep;
}

} // namespace nibm
