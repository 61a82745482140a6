#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace nibm {

// Ai and Ai'. Maclaurin series on |x| <= 2.5, Boost.Math outside;
// RangeError below -50.
double airy_ai(double x);
double airy_ai_prime(double x);

// Composite Gauss-Legendre along straight rays from a vertex. Panels are
// graded geometrically near the vertex (down to delta0 / 16) and uniform
// beyond; the truncation radius is found by a scan of the exponent and then
// multiplied by radius_scale.
struct RayQuadrature {
    double delta0 = 1e-3;      // vertex offset separating the two contours
    double radius_scale = 1.0;
    double panel = 0.25;       // uniform panel length
    std::size_t per_panel = 16;
};

// Extended Airy kernel: double integral over rays at +-pi/3 (zeta, vertex 0)
// and +-2pi/3 (omega, vertex -delta0), minus the heat term for tau1 > tau2.
double airy_kernel(double tau1, double tau2, double u, double v, const RayQuadrature& rq = {});
// Entry (i, k) is K(us[i], vs[k]).
Eigen::MatrixXd airy_kernel_grid(double tau1, double tau2, const std::vector<double>& us,
                                 const std::vector<double>& vs, const RayQuadrature& rq = {});

// The other common convention:
//   int_0^inf e^{-r (tau2 - tau1)} Ai(u + r) Ai(v + r) dr        tau2 >= tau1
//  -int_{-inf}^0 (same integrand) dr                              tau2 <  tau1
// The second branch is evaluated as the first minus the full-line Gaussian
// integral, which has a closed form.
double airy_kernel_rep2(double tau1, double tau2, double u, double v);
// exp(-tau1 u + tau2 v + (tau1^3 - tau2^3) / 3): rep2(u, v) equals this
// times airy_kernel(u - tau1^2, v - tau2^2).
double airy_conjugation_factor(double tau1, double tau2, double u, double v);
// airy_kernel computed through rep2 and the conjugation.
double airy_kernel_via_rep2(double tau1, double tau2, double u, double v);

// Heat parts subtracted for tau1 > tau2 (zero otherwise).
double airy_heat(double tau1, double tau2, double u, double v);
double pearcey_heat(double tau1, double tau2, double u, double v);

// Extended Pearcey kernel: zeta on the imaginary axis, omega on the four
// rays at +-pi/4, +-3pi/4 (right pair moved to vertex +delta0, left pair to
// -delta0), minus the heat term for tau1 > tau2.
double pearcey_kernel(double tau1, double tau2, double u, double v, const RayQuadrature& rq = {});
Eigen::MatrixXd pearcey_kernel_grid(double tau1, double tau2, const std::vector<double>& us,
                                    const std::vector<double>& vs, const RayQuadrature& rq = {});
// Double integral before the heat term and before taking the real part.
std::complex<double> pearcey_integral_raw(double tau1, double tau2, double u, double v,
                                          const RayQuadrature& rq = {});
// Second scheme: 1/(zeta - omega) written as a Laplace integral, leaving an
// s-integral of products of single contour integrals.
double pearcey_kernel_split(double tau1, double tau2, double u, double v);

} // namespace nibm
