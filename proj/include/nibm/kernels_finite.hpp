#pragma once

#include "nibm/free_conv.hpp"
#include "nibm/measures.hpp"

#include <Eigen/Dense>

#include <complex>
#include <memory>
#include <string>
#include <vector>

namespace nibm {

// How the alternating residue sum is accumulated.
//   Double       log-domain terms, plain summation
//   Compensated  log-domain terms, Neumaier summation
//   Extended     MPFR with the bit count chosen from the term magnitudes
//   Auto         Compensated, escalating to Extended on a PrecisionError
enum class Precision { Double, Compensated, Extended, Auto };
Precision parse_precision(const std::string& name);
const char* precision_name(Precision p);

// Per atom j: log prod_{k != j} |x_j - x_k| and the sign of that product.
class ResidueTable {
public:
    explicit ResidueTable(const EmpiricalMeasure& mn);
    std::size_t size() const { return log_mag_.size(); }
    double log_magnitude(std::size_t j) const { return log_mag_[j]; }
    int sign(std::size_t j) const { return sign_[j]; }
    // Largest |L_j - direct recomputation|.
    double verify(const EmpiricalMeasure& mn) const;

private:
    std::vector<double> log_mag_;
    std::vector<int> sign_;
};

struct KernelDiagnostics {
    double cancellation_digits = 0; // log10(largest term / |result|), worst over the query
    long bits = 53;                 // mantissa bits of the accepted evaluation
    Precision used = Precision::Double;
    bool near_atom = false;         // y within 1e-10 of an atom
};

// (2 pi var)^{-1/2} exp(-dx^2 / (2 var)).
double heat_kernel(double var, double dx);

// Finite-n kernel K_{n,s,t}(x, y) of the non-intersecting paths started from
// the atoms of mn, conjugated by exp(f(t,y) - f(s,x)) with
// f(s,x) = -n g x + n g^2 s / 2 (g = 0 gives the bare kernel).
class FiniteKernel {
public:
    FiniteKernel(EmpiricalMeasure mn, Precision p = Precision::Auto, double gauge = 0.0);
    ~FiniteKernel();
    FiniteKernel(FiniteKernel&&) noexcept;
    FiniteKernel& operator=(FiniteKernel&&) noexcept;

    std::size_t n() const { return mn_.size(); }
    const EmpiricalMeasure& measure() const { return mn_; }
    const ResidueTable& residues() const { return table_; }
    Precision precision() const { return prec_; }
    double gauge() const { return g_; }

    double operator()(double s, double x, double t, double y, KernelDiagnostics* diag = nullptr) const;
    // Entry (i, k) is K(s, xs[i]; t, ys[k]).
    Eigen::MatrixXd grid(double s, const std::vector<double>& xs, double t, const std::vector<double>& ys,
                         KernelDiagnostics* diag = nullptr) const;
    // The double-integral part alone (no heat subtraction).
    Eigen::MatrixXd integral_part(double s, const std::vector<double>& xs, double t,
                                  const std::vector<double>& ys, KernelDiagnostics* diag = nullptr) const;
    // Conjugated heat term subtracted for s > t; zero otherwise.
    double heat(double s, double x, double t, double y) const;

private:
    struct Impl;
    EmpiricalMeasure mn_;
    ResidueTable table_;
    Precision prec_;
    double g_;
    std::unique_ptr<Impl> impl_;
};

double kernel_exact(const EmpiricalMeasure& mn, double s, double x, double t, double y,
                    Precision p = Precision::Auto, KernelDiagnostics* diag = nullptr);

// Direct two-dimensional quadrature of the double contour integral; slow,
// long double, meant only to cross-check kernel_exact for small n.
struct ContourSpec {
    std::size_t panels = 48;    // per contour piece, doubled once for the error check
    std::size_t per_panel = 16; // Gauss-Legendre nodes per panel
    double rel_tol = 1e-10;
};
double kernel_quadrature(const EmpiricalMeasure& mn, double s, double x, double t, double y,
                         const ContourSpec& spec = {});

// Kernel in critical coordinates: (1 / (c n^p)) K~ at
// s = t_n(tau1), x = x_n(tau1) + u / (c n^p) and t, y likewise from (tau2, v).
class RescaledKernel {
public:
    RescaledKernel(EmpiricalMeasure mn, CriticalFrame frame, Precision p = Precision::Auto);

    const CriticalFrame& frame() const { return frame_; }
    double n() const { return n_; }
    // Physical (time, position) of a rescaled point.
    FramePoint point(double tau, double u) const;

    double operator()(double tau1, double tau2, double u, double v, KernelDiagnostics* diag = nullptr) const;
    // Entry (i, k) is the kernel at (tau1, us[i]; tau2, vs[k]).
    Eigen::MatrixXd grid(double tau1, double tau2, const std::vector<double>& us,
                         const std::vector<double>& vs, KernelDiagnostics* diag = nullptr) const;
    // Rescaled heat part; zero unless tau1 > tau2.
    double heat(double tau1, double tau2, double u, double v) const;

private:
    CriticalFrame frame_;
    double n_, unit_;
    FiniteKernel kernel_;
};

// Upper-half-plane solution z of z + t G_{mn}(z) = target on the graph of the
// discrete Biane height.
std::complex<double> saddle_points(const EmpiricalMeasure& mn, double t, double target);

} // namespace nibm
