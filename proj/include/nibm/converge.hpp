#pragma once

#include "nibm/free_conv.hpp"
#include "nibm/kernels_finite.hpp"
#include "nibm/measures.hpp"

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace nibm {

struct ConvergeRow {
    std::size_t n = 0;
    double max_abs_error = 0;
    // where the maximum was attained
    double tau1 = 0, tau2 = 0, u = 0, v = 0;
    double cancellation_digits = 0;
};

struct ConvergeReport {
    std::vector<ConvergeRow> rows;
    std::optional<bool> decreasing;    // strictly, over consecutive n; empty for one n
    std::optional<double> fitted_rate; // r in max_abs_error ~ n^{-r}, least squares in logs
};

// Max over the tau pairs and the (u, v) grid of |rescaled finite-n kernel -
// limit kernel| for each n, the limit being the extended Airy or Pearcey
// kernel according to the frame. `initial(n)` supplies the starting atoms.
// Library errors are rethrown with n and the tau pair appended.
ConvergeReport converge_sweep(const std::function<EmpiricalMeasure(std::size_t)>& initial,
                              const CriticalFrame& frame, const std::vector<std::size_t>& ns,
                              const std::vector<std::pair<double, double>>& taus,
                              const std::vector<double>& grid, Precision precision = Precision::Auto);

// Slope of -log(err) against log(n); needs two or more points with err > 0.
std::optional<double> fitted_rate(const std::vector<std::size_t>& ns, const std::vector<double>& errors);

} // namespace nibm
