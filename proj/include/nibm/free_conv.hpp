#pragma once

#include "nibm/measures.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nibm {

enum class Regime { AiryRight, AiryLeft, Pearcey };
const char* regime_name(Regime r);

struct CriticalFrame {
    double x_star = 0;
    double t_cr = 0;
    double G0 = 0, G1 = 0, G2 = 0, G3 = 0;
    Regime regime = Regime::AiryRight;
    double scale = 0; // c2 (Airy) or c3 (Pearcey)
    double kappa = 0;
    double eps = 0.05;

    bool airy() const { return regime != Regime::Pearcey; }
    // Exponent p of the spatial scale c n^p: 2/3 or 3/4.
    double space_power() const { return airy() ? 2.0 / 3.0 : 0.75; }
    // +1 for AiryRight and Pearcey, -1 for AiryLeft (the gap lies to the left).
    int orientation() const { return regime == Regime::AiryLeft ? -1 : 1; }
    // Offset t_n(tau) - t_cr, computed without forming t_n.
    double time_offset(double n, double tau) const;
};

// Imaginary height y_{t,mu}(x): 0 if \int dmu/(x-s)^2 <= 1/t, else the root of
// \int dmu/((x-s)^2 + y^2) = 1/t.
double biane_y(const Measure& m, double t, double x);

// H_{t,mu}(z) = z + t G_mu(z).
std::complex<double> biane_h(const Measure& m, double t, std::complex<double> z);

// Phi_t(x) = H_{t,mu}(x + i y_{t,mu}(x)).
double evolve_point(const Measure& m, double t, double x);

struct BianePoint {
    double x, y, phi;
};

// Grid of (x, y, Phi) on [lo, hi] with geometric refinement around `focus`
// (ratio 1/2 down to spacing 1e-8). Phi is checked to increase strictly.
class BianeState {
public:
    BianeState(Measure m, double t, double lo, double hi, std::size_t points = 64,
               std::optional<double> focus = std::nullopt);

    double t() const { return t_; }
    const std::vector<BianePoint>& grid() const { return grid_; }
    double phi_min() const { return grid_.front().phi; }
    double phi_max() const { return grid_.back().phi; }

    // Phi_t^{-1}(xi) by bracketing on the grid then TOMS748.
    double inverse(double xi) const;
    // psi_t(xi) = y(Phi^{-1}(xi)) / (pi t).
    double density(double xi) const;
    // psi_t at the image of a pre-image point x.
    BianePoint at(double x) const;

private:
    Measure m_;
    double t_;
    std::vector<BianePoint> grid_;
};

// Convenience: psi_t(xi) through a default BianeState covering the support.
double density_at(const Measure& m, double t, double xi);

// (\int dmu/(x-s)^2)^{-1}, 0 when the integral diverges.
double critical_time(const Measure& m, double x);

struct PathPoint {
    double x;
    bool linearized; // t > t_cr: the formula is only the linearisation
};
PathPoint critical_path(const CriticalFrame& f, double t);

// Regime classification at x*. tol < 0 selects 1e-9 max(1, |G3|^{2/3}).
CriticalFrame classify(const Measure& m, double x_star, double kappa, double tol = -1.0);
CriticalFrame classify(const DensitySpec& d, double tol = -1.0);

struct FramePoint {
    double t, x;
};
FramePoint frame_maps(const CriticalFrame& f, double n, double tau);

struct LocalFit {
    double alpha = 0;     // fitted exponent
    double prefactor = 0; // psi / |d|^alpha_ref at the smallest offset
    double alpha_ref = 0; // 1/2 (Airy) or 1/3 (Pearcey)
    bool monotone = true; // local slopes approach alpha monotonically
    std::vector<double> offsets, values;
};

// Fit of psi_t(center + side d) ~ C d^alpha over d in [d_min, d_max]
// (dyadic). side = 0 pools both sides.
LocalFit fit_local_exponent(const Measure& m, double t, double center, int side, double d_max,
                            double d_min, double alpha_ref);

// Exponent at x*(t_cr): square-root side for Airy, both sides for Pearcey.
LocalFit local_exponent(const Measure& m, const CriticalFrame& f);

} // namespace nibm
