#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace nibm {

// Probability density on [a, b] with an interior zero of order kappa at x*.
// Two families: the normalised power law C|x - x*|^kappa (kappa = 0 gives the
// uniform density) and a piecewise-linear table.
class DensitySpec {
public:
    enum class Kind { Power, Table };

    static DensitySpec power(double a, double b, double x_star, double kappa);
    static DensitySpec uniform(double a, double b);
    // Piecewise-linear density through (xs[i], values[i]); normalised on
    // construction. x_star/kappa describe the interior zero (kappa may be 1
    // for a linear vanishing).
    static DensitySpec table(std::vector<double> xs, std::vector<double> values, double x_star,
                             double kappa);

    Kind kind() const { return kind_; }
    double a() const { return a_; }
    double b() const { return b_; }
    double x_star() const { return x_star_; }
    double kappa() const { return kappa_; }
    double normalization() const { return c_; }
    bool analytic_cdf() const { return true; }
    const std::vector<double>& table_x() const { return tx_; }
    const std::vector<double>& table_values() const { return tv_; }

    double density(double x) const;
    // psi(x* + side * r) for r >= 0, evaluated from the offset so that values
    // near x* keep full relative accuracy.
    double density_offset(double r, int side) const;
    double cdf(double x) const;
    double quantile(double p) const;

    // Mirror image under x -> 2c - x.
    DensitySpec reflected(double c) const;

private:
    Kind kind_ = Kind::Power;
    double a_ = 0, b_ = 1, x_star_ = 0.5, kappa_ = 0, c_ = 1;
    std::vector<double> tx_, tv_, tcum_;
};

// Uniformly weighted atoms, kept sorted.
class EmpiricalMeasure {
public:
    EmpiricalMeasure() = default;
    // Sorts; rejects atoms closer than 1e-14 times the spread.
    explicit EmpiricalMeasure(std::vector<double> atoms);

    std::size_t size() const { return x_.size(); }
    const std::vector<double>& atoms() const { return x_; }
    double operator[](std::size_t i) const { return x_[i]; }
    double min() const { return x_.front(); }
    double max() const { return x_.back(); }
    // Fraction of atoms <= x.
    double cdf(double x) const;
    EmpiricalMeasure reflected(double c) const;

private:
    std::vector<double> x_;
};

using Measure = std::variant<DensitySpec, EmpiricalMeasure>;

// Smallest interval containing the support.
std::pair<double, double> support_hull(const Measure& m);

// Open window of half-width m * n^{-1/(kappa+1)} around x*. An atom inside it
// is moved down to the midpoint between the window's lower edge and its lower
// neighbour.
struct DisplacementRule {
    double m = 1.0;
};

EmpiricalMeasure quantile_init(const DensitySpec& spec, std::size_t n, DisplacementRule rule = {});

double cdf_distance(const EmpiricalMeasure& mn, const Measure& other);

// Number of atoms times cdf_distance; the "M" of the quantile bound.
double assumption2_constant(const EmpiricalMeasure& mn, const DensitySpec& spec);

bool gap_check(const EmpiricalMeasure& mn, double x_star, double kappa, double m);

std::complex<double> stieltjes(const Measure& m, std::complex<double> z);

struct StieltjesDerivatives {
    double x = 0;
    double G0 = 0, G1 = 0, G2 = 0, G3 = 0; // G3 is NaN when not requested
};

// G_j = (-1)^j j! \int dmu(s) / (x - s)^{j+1}, j = 0..max_order.
StieltjesDerivatives stieltjes_derivs(const Measure& m, double x, int max_order = 3);

// \int dmu(s) / ((x - s)^2 + y^2); +inf when it diverges at y = 0.
double inverse_square_integral(const Measure& m, double x, double y);

std::complex<double> log_potential(const EmpiricalMeasure& mn, std::complex<double> z);

enum class Scaling { Airy, Pearcey };

struct ExpansionResidual {
    double residual = 0;   // max over the disk grid
    double radius = 0;     // n^{-1/3+eps} or n^{-1/4+eps}
    std::size_t skipped = 0;
};

ExpansionResidual expansion_residual(const EmpiricalMeasure& mn, const Measure& base, double x_star,
                                     double eps, Scaling regime);

// Slope of log psi(x* +- r) against log r for r in [2^-30, 2^-10], averaged
// over the two sides.
double fit_vanishing_exponent(const DensitySpec& spec);

void write_atoms_csv(std::ostream& os, const EmpiricalMeasure& mn);
EmpiricalMeasure read_atoms_csv(std::istream& is);

} // namespace nibm
