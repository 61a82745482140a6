#include "nibm/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace nibm::simd {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa initial_isa() {
    const char* env = std::getenv("NIBM_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return Isa::Scalar;
    return avx2_available() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

const detail::Table& table() {
    if (current().load(std::memory_order_relaxed) == Isa::Avx2) return *detail::avx2_table();
    return detail::scalar_table();
}

} // namespace

bool avx2_available() {
    // CPU check first: avx2_table() itself lives in the AVX2 translation unit.
    static const bool ok = cpu_has_avx2() && detail::avx2_table() != nullptr;
    return ok;
}

Isa active_isa() { return current().load(); }

void force_isa(Isa isa) {
    if (isa == Isa::Avx2 && !avx2_available()) isa = Isa::Scalar;
    current().store(isa);
}

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

double inv_sq_sum(const double* a, std::size_t n, double x, double y2) {
    return table().inv_sq_sum(a, n, x, y2);
}

std::complex<double> cauchy_sum(const double* a, std::size_t n, std::complex<double> z) {
    return table().cauchy_sum(a, n, z);
}

void pair_repulsion(const double* x, std::size_t n, double* out) {
    table().pair_repulsion(x, n, out);
}

double distance_sum(const double* p, std::size_t np, const double* q, std::size_t nq,
                    std::size_t dim) {
    return table().distance_sum(p, np, q, nq, dim);
}

double dot2(const double* a, const double* b, std::size_t n) { return table().dot2(a, b, n); }

} // namespace nibm::simd
