#pragma once

#include "nibm/kernels_finite.hpp"

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <memory>
#include <vector>

namespace nibm {

// Block (a, b) of a multi-time kernel: entry (i, k) is K_{tau_a, tau_b}(us[i],
// vs[k]), heat part included when tau_a > tau_b.
using BlockFn = std::function<Eigen::MatrixXd(std::size_t a, std::size_t b, const std::vector<double>& us,
                                              const std::vector<double>& vs)>;

class KernelSource {
public:
    // Stationary extended Airy kernel: the single-integral form, with the
    // closed-form equal-time kernel on diagonal blocks.
    static KernelSource limit_airy();
    // Rescaled finite-n kernel. For a gap on the left the axis is reflected so
    // that thresholds always bound the window from below.
    static KernelSource finite(std::shared_ptr<const RescaledKernel> kernel);
    static KernelSource custom(BlockFn fn);

    Eigen::MatrixXd block(const std::vector<double>& taus, std::size_t a, std::size_t b,
                          const std::vector<double>& us, const std::vector<double>& vs) const;
    bool is_limit_airy() const { return kind_ == Kind::LimitAiry; }

private:
    enum class Kind { LimitAiry, Finite, Custom };
    Kind kind_ = Kind::LimitAiry;
    std::shared_ptr<const RescaledKernel> finite_;
    BlockFn custom_;
};

struct FredholmProblem {
    std::vector<double> taus;  // strictly increasing
    std::vector<double> lower; // thresholds a_j
    std::vector<double> upper; // b_j; +inf switches to u = a + s / (1 - s)
    KernelSource source = KernelSource::limit_airy();
    std::size_t q = 64;        // Gauss-Legendre nodes per interval
};

// Nodes and weights on (a, b) as used by the determinant.
struct IntervalRule {
    std::vector<double> u, w;
};
IntervalRule interval_rule(double a, double b, std::size_t q);

// det(I - W^{1/2} K W^{1/2}) over the block operator.
double fredholm_det(const FredholmProblem& p);

// Stationary Airy-2 finite-dimensional distribution P(A(tau_j) <= a_j, all j).
// m <= 4 and tau span <= 4.
double airy2_fdd(const std::vector<double>& taus, const std::vector<double>& as, std::size_t q = 64);

// GUE Tracy-Widom CDF, a in [-10, 10].
double tw2_cdf(double a, std::size_t q = 64);

// Mean of F2 from the CDF: int_0^inf (1 - F) - int_{-inf}^0 F, on [lo, hi]
// with `nodes` Gauss-Legendre points per unit length.
double tw2_mean(std::size_t q = 64, std::size_t nodes = 8, double lo = -10.0, double hi = 6.0);

// Finite-n multi-time gap probability: probability that no particle sits in
// the rescaled windows (lower_j, upper_j] at the rescaled times taus_j. An
// empty `upper` means c n^eps for every window.
double finite_gap_probability(std::shared_ptr<const RescaledKernel> kernel, const std::vector<double>& taus,
                              const std::vector<double>& lower, std::vector<double> upper = {},
                              std::size_t q = 64);

} // namespace nibm
