#include "nibm/sim.hpp"

#include "nibm/error.hpp"
#include "nibm/simd.hpp"
#include "parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>
#include <string>

namespace nibm {

namespace {

void check_times(const std::vector<double>& times) {
    if (times.empty()) throw DomainError("need at least one observation time");
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!(times[k] > 0.0)) throw DomainError("observation times must be positive");
        if (k > 0 && !(times[k] > times[k - 1])) throw DomainError("observation times must increase");
    }
}

PathEnsemble empty_ensemble(const EmpiricalMeasure& init, std::vector<double> times, std::size_t replicas,
                            std::uint64_t seed, Sampler s) {
    check_times(times);
    if (replicas == 0) throw DomainError("need at least one replica");
    if (init.size() == 0) throw DomainError("empty initial configuration");
    PathEnsemble e;
    e.n = init.size();
    e.replicas = replicas;
    e.times = std::move(times);
    e.seed = seed;
    e.sampler = s;
    e.data.assign(e.n * e.replicas * e.times.size(), 0.0);
    return e;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Position of tau_j's observation time inside the ensemble.
std::size_t time_index(const PathEnsemble& ens, double t) {
    for (std::size_t k = 0; k < ens.times.size(); ++k)
        if (std::abs(ens.times[k] - t) <= 1e-12 * std::max(1.0, t)) return k;
    throw DomainError("ensemble has no observation at t_n(tau) = " + std::to_string(t));
}

} // namespace

const char* sampler_name(Sampler s) { return s == Sampler::MatrixExact ? "matrix-exact" : "euler"; }

std::uint64_t replica_seed(std::uint64_t seed, std::size_t replica) {
    return splitmix64(splitmix64(seed) ^ (0xd1b54a32d192ed03ULL * (replica + 1)));
}

PathEnsemble sample_matrix(const EmpiricalMeasure& init, std::vector<double> times, std::size_t replicas,
                           std::uint64_t seed) {
    auto ens = empty_ensemble(init, std::move(times), replicas, seed, Sampler::MatrixExact);
    const std::size_t n = ens.n;
    const double rn = std::sqrt(static_cast<double>(n));
    detail::parallel_for(replicas, [&](std::size_t r) {
        std::mt19937_64 rng(replica_seed(seed, r));
        std::normal_distribution<double> gauss;
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = rn * init[i];
        double prev = 0.0;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver;
        for (std::size_t k = 0; k < ens.times.size(); ++k) {
            const double dt = ens.times[k] - prev, sd = std::sqrt(dt), sh = std::sqrt(0.5 * dt);
            prev = ens.times[k];
            for (std::size_t i = 0; i < n; ++i) {
                m(i, i) += sd * gauss(rng);
                for (std::size_t j = i + 1; j < n; ++j) {
                    const double re = sh * gauss(rng);
                    const double im = sh * gauss(rng);
                    m(i, j) += std::complex<double>(re, im);
                    m(j, i) += std::complex<double>(re, -im);
                }
            }
            solver.compute(m, Eigen::EigenvaluesOnly);
            if (solver.info() != Eigen::Success)
                throw ConvergenceError("eigensolver failed in replica " + std::to_string(r) + " (seed " +
                                       std::to_string(seed) + ")");
            auto out = ens.at(r, k);
            for (std::size_t i = 0; i < n; ++i) out[i] = solver.eigenvalues()[i] / rn;
            std::sort(out.begin(), out.end());
        }
    });
    return ens;
}

PathEnsemble euler_sde(const EmpiricalMeasure& init, std::vector<double> times, double dt, std::size_t replicas,
                       std::uint64_t seed, EulerOptions opt) {
    auto ens = empty_ensemble(init, std::move(times), replicas, seed, Sampler::Euler);
    const std::size_t n = ens.n;
    if (!(dt > 0.0)) throw DomainError("euler_sde needs dt > 0");
    if (n > 1) {
        double gap = init[1] - init[0];
        for (std::size_t i = 2; i < n; ++i) gap = std::min(gap, init[i] - init[i - 1]);
        if (dt > 1e-4 * gap * gap)
            throw DomainError("dt exceeds 1e-4 times the smallest initial gap squared (" +
                              std::to_string(1e-4 * gap * gap) + ")");
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    std::atomic<std::size_t> steps{0}, collisions{0};
    detail::parallel_for(replicas, [&](std::size_t r) {
        std::mt19937_64 rng(replica_seed(seed, r));
        std::normal_distribution<double> gauss;
        std::vector<double> x(init.atoms()), drift(n);
        std::size_t my_steps = 0, my_coll = 0;
        double t = 0.0;
        for (std::size_t k = 0; k < ens.times.size(); ++k) {
            const double span = ens.times[k] - t;
            const auto count = static_cast<std::size_t>(std::ceil(span / dt));
            const double h = span / count, noise = std::sqrt(h * inv_n);
            for (std::size_t s = 0; s < count; ++s) {
                simd::pair_repulsion(x.data(), n, drift.data());
                for (std::size_t i = 0; i < n; ++i) {
                    x[i] += h * inv_n * drift[i];
                    if (opt.noise) x[i] += noise * gauss(rng);
                }
                if (!std::is_sorted(x.begin(), x.end())) {
                    ++my_coll;
                    std::sort(x.begin(), x.end());
                }
            }
            my_steps += count;
            t = ens.times[k];
            std::copy(x.begin(), x.end(), ens.at(r, k).begin());
        }
        steps += my_steps;
        collisions += my_coll;
    });
    ens.steps = steps;
    ens.collisions = collisions;
    if (ens.collisions > opt.max_collision_rate * ens.steps)
        throw ConvergenceError("Euler scheme reordered particles in " + std::to_string(ens.collisions) + " of " +
                               std::to_string(ens.steps) + " steps; use a smaller dt");
    return ens;
}

std::vector<double> frame_times(const CriticalFrame& f, std::size_t n, const std::vector<double>& taus) {
    std::vector<double> out;
    for (double tau : taus) out.push_back(frame_maps(f, static_cast<double>(n), tau).t);
    return out;
}

stats::Proportion meso_gap_frequency(const PathEnsemble& ens, const CriticalFrame& f, double eps,
                                     double eps_prime, const std::vector<double>& taus) {
    if (!(eps_prime > 0.0 && eps_prime <= eps)) throw DomainError("need 0 < eps' <= eps");
    if (taus.empty()) throw DomainError("need at least one tau");
    const double n = static_cast<double>(ens.n);
    const double near = std::pow(n, eps_prime - 2.0 / 3.0), far = std::pow(n, eps - 2.0 / 3.0);
    const int o = f.orientation();
    std::vector<std::size_t> idx;
    std::vector<double> centre;
    for (double tau : taus) {
        const auto fp = frame_maps(f, n, tau);
        idx.push_back(time_index(ens, fp.t));
        centre.push_back(fp.x);
    }
    // eps' = eps leaves an empty window.
    if (eps_prime == eps) return stats::wilson(ens.replicas, ens.replicas);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < ens.replicas; ++r) {
        bool clear = true;
        for (std::size_t j = 0; j < taus.size() && clear; ++j)
            for (double x : ens.at(r, idx[j])) {
                const double d = o * (x - centre[j]);
                if (d >= near && d <= far) {
                    clear = false;
                    break;
                }
            }
        hits += clear;
    }
    return stats::wilson(hits, ens.replicas);
}

XiSample xi_statistic(const PathEnsemble& ens, const CriticalFrame& f, double eps, double tau) {
    if (!f.airy()) throw DomainError("xi_statistic needs an Airy frame");
    const double n = static_cast<double>(ens.n);
    const auto fp = frame_maps(f, n, tau);
    const std::size_t k = time_index(ens, fp.t);
    const double cut = std::pow(n, eps - 2.0 / 3.0), unit = f.scale * std::pow(n, 2.0 / 3.0);
    const int o = f.orientation();
    XiSample out;
    for (std::size_t r = 0; r < ens.replicas; ++r) {
        bool found = false;
        double best = 0.0;
        for (double x : ens.at(r, k)) {
            const double d = o * (x - fp.x);
            if (d <= cut && (!found || d > best)) {
                best = d;
                found = true;
            }
        }
        if (found) {
            out.values.push_back(unit * best);
            out.replicas.push_back(r);
        } else {
            ++out.missing;
        }
    }
    return out;
}

namespace {

constexpr char kMagic[8] = {'N', 'I', 'B', 'M', 'E', 'N', 'S', '1'};

template <class T>
void put(std::ostream& os, T v) {
    static_assert(std::endian::native == std::endian::little, "dump format assumes a little-endian host");
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw IoError("truncated ensemble dump");
    return v;
}

} // namespace

void write_ensemble(std::ostream& os, const PathEnsemble& ens) {
    os.write(kMagic, sizeof kMagic);
    for (std::uint64_t v : {std::uint64_t(ens.n), std::uint64_t(ens.replicas), std::uint64_t(ens.times.size()),
                            ens.seed, std::uint64_t(ens.sampler == Sampler::Euler), std::uint64_t(ens.steps),
                            std::uint64_t(ens.collisions)})
        put(os, v);
    for (double t : ens.times) put(os, t);
    for (double x : ens.data) put(os, x);
    if (!os) throw IoError("failed writing ensemble dump");
}

PathEnsemble read_ensemble(std::istream& is) {
    char magic[sizeof kMagic];
    if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw IoError("not an ensemble dump");
    PathEnsemble e;
    e.n = get<std::uint64_t>(is);
    e.replicas = get<std::uint64_t>(is);
    const auto k = get<std::uint64_t>(is);
    e.seed = get<std::uint64_t>(is);
    e.sampler = get<std::uint64_t>(is) ? Sampler::Euler : Sampler::MatrixExact;
    e.steps = get<std::uint64_t>(is);
    e.collisions = get<std::uint64_t>(is);
    if (e.n == 0 || e.replicas == 0 || k == 0 || e.n * e.replicas * k > (std::size_t(1) << 32))
        throw IoError("implausible ensemble dimensions");
    e.times.resize(k);
    for (auto& t : e.times) t = get<double>(is);
    e.data.resize(e.n * e.replicas * k);
    for (auto& x : e.data) x = get<double>(is);
    return e;
}

void write_ensemble_csv(std::ostream& os, const PathEnsemble& ens) {
    os << "replica,time_index,t,particle,x\n";
    os.precision(17);
    for (std::size_t r = 0; r < ens.replicas; ++r)
        for (std::size_t k = 0; k < ens.times.size(); ++k) {
            const auto v = ens.at(r, k);
            for (std::size_t i = 0; i < ens.n; ++i)
                os << r << ',' << k << ',' << ens.times[k] << ',' << i << ',' << v[i] << '\n';
        }
    if (!os) throw IoError("failed writing ensemble CSV");
}

} // namespace nibm
