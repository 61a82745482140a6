#pragma once

#include "nibm/free_conv.hpp"
#include "nibm/measures.hpp"
#include "nibm/stats.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace nibm {

enum class Sampler { MatrixExact, Euler };
const char* sampler_name(Sampler s);

// Particle positions for every replica and observation time, each vector
// sorted ascending. Replica r draws from its own stream (see replica_seed), so
// a replica is reproducible on its own and independent of the worker count.
struct PathEnsemble {
    std::size_t n = 0, replicas = 0;
    std::vector<double> times;
    std::uint64_t seed = 0;
    Sampler sampler = Sampler::MatrixExact;
    std::vector<double> data; // [replica][time][particle]
    // Euler only: steps taken per replica and steps whose update reordered
    // particles, summed over replicas.
    std::size_t steps = 0, collisions = 0;

    std::span<const double> at(std::size_t replica, std::size_t k) const {
        return {data.data() + (replica * times.size() + k) * n, n};
    }
    std::span<double> at(std::size_t replica, std::size_t k) {
        return {data.data() + (replica * times.size() + k) * n, n};
    }
};

// splitmix64 of the master seed combined with the replica index; seeds the
// replica's mt19937_64.
std::uint64_t replica_seed(std::uint64_t seed, std::size_t replica);

// Eigenvalues of M(t)/sqrt(n), M(0) = diag(sqrt(n) X(0)) plus Hermitian
// Gaussian increments (diagonal variance dt, off-diagonal real and imaginary
// parts dt/2 each).
PathEnsemble sample_matrix(const EmpiricalMeasure& init, std::vector<double> times, std::size_t replicas,
                           std::uint64_t seed);

struct EulerOptions {
    bool noise = true; // false integrates the drift ODE only
    double max_collision_rate = 0.01;
};

// Euler-Maruyama for dX_j = dB_j / sqrt(n) + (1/n) sum_{k != j} dt / (X_j - X_k),
// landing exactly on each observation time. dt must not exceed 1e-4 times the
// smallest initial gap squared.
PathEnsemble euler_sde(const EmpiricalMeasure& init, std::vector<double> times, double dt, std::size_t replicas,
                       std::uint64_t seed, EulerOptions opt = {});

// Observation times t_n(tau) for an Airy frame.
std::vector<double> frame_times(const CriticalFrame& f, std::size_t n, const std::vector<double>& taus);

// Fraction of replicas with no particle in [x_n + n^{eps' - 2/3}, x_n + n^{eps - 2/3}]
// at every tau (mirrored when the gap is on the left), with a Wilson interval.
// Any frame is accepted; outside the Airy regime the number is diagnostic only.
stats::Proportion meso_gap_frequency(const PathEnsemble& ens, const CriticalFrame& f, double eps,
                                     double eps_prime, const std::vector<double>& taus);

// Largest particle below x_n + n^{eps - 2/3} (smallest above the mirrored
// threshold for a left gap), as c n^{2/3} (xi - x_n) with the frame's
// orientation applied. Replicas without such a particle are counted in
// `missing` and left out of `values`.
struct XiSample {
    std::vector<double> values;
    std::vector<std::size_t> replicas; // replica index of each value
    std::size_t missing = 0;
};
XiSample xi_statistic(const PathEnsemble& ens, const CriticalFrame& f, double eps, double tau);

// Binary dump: "NIBMENS1", then n, replicas, K, seed, sampler, steps,
// collisions as uint64, the K times, then the data, all little-endian.
void write_ensemble(std::ostream& os, const PathEnsemble& ens);
PathEnsemble read_ensemble(std::istream& is);
// CSV with header replica,time_index,t,particle,x.
void write_ensemble_csv(std::ostream& os, const PathEnsemble& ens);

} // namespace nibm
