#pragma once

// Thin RAII layer over MPFR for the residue sums. Private to the library.

#include <mpfr.h>

#include <cstddef>
#include <memory>
#include <vector>

namespace nibm::mp {

constexpr mpfr_rnd_t kRnd = MPFR_RNDN;

// Fixed-size array of mpfr_t sharing one precision.
class Array {
public:
    Array() = default;
    Array(std::size_t n, mpfr_prec_t prec) : prec_(prec), v_(n) {
        for (auto& x : v_) {
            mpfr_init2(&x, prec);
            mpfr_set_zero(&x, 1);
        }
    }
    Array(const Array&) = delete;
    Array& operator=(const Array&) = delete;
    Array(Array&& o) noexcept : prec_(o.prec_), v_(std::move(o.v_)) { o.v_.clear(); }
    Array& operator=(Array&& o) noexcept {
        if (this != &o) {
            release();
            prec_ = o.prec_;
            v_ = std::move(o.v_);
            o.v_.clear();
        }
        return *this;
    }
    ~Array() { release(); }

    std::size_t size() const { return v_.size(); }
    mpfr_prec_t prec() const { return prec_; }
    mpfr_ptr operator[](std::size_t i) { return &v_[i]; }
    mpfr_srcptr operator[](std::size_t i) const { return &v_[i]; }

private:
    void release() {
        for (auto& x : v_) mpfr_clear(&x);
        v_.clear();
    }
    mpfr_prec_t prec_ = 53;
    std::vector<__mpfr_struct> v_;
};

// Single scoped mpfr_t.
class Scalar {
public:
    explicit Scalar(mpfr_prec_t prec) { mpfr_init2(v_, prec); }
    Scalar(const Scalar&) = delete;
    Scalar& operator=(const Scalar&) = delete;
    ~Scalar() { mpfr_clear(v_); }
    operator mpfr_ptr() { return v_; }
    operator mpfr_srcptr() const { return v_; }

private:
    mpfr_t v_;
};

// Gauss-Hermite nodes (non-negative half, ascending) and weights for
// exp(-x^2) at the requested precision; the weight of a positive node already
// counts its mirror image. Cached.
struct HermiteHalf {
    Array nodes;
    Array weights;
};
std::shared_ptr<const HermiteHalf> gauss_hermite_half(std::size_t m, mpfr_prec_t prec);

} // namespace nibm::mp
