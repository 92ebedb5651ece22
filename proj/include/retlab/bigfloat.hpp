#ifndef RETLAB_BIGFLOAT_HPP
#define RETLAB_BIGFLOAT_HPP

#include <gmpxx.h>
#include <mpfr.h>

#include <cstdint>
#include <stdexcept>
#include <utility>

#include "retlab/rational.hpp"

namespace retlab {

/// RAII holder for a single mpfr value.
class big_float {
public:
    explicit big_float(mpfr_prec_t prec) { mpfr_init2(v_, prec); }
    big_float(const big_float& o) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    big_float(big_float&& o) noexcept {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_swap(v_, o.v_);
    }
    big_float& operator=(const big_float&) = delete;
    ~big_float() { mpfr_clear(v_); }

    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }

private:
    mpfr_t v_;
};

/// Exact rational equal to the mpfr value (binary floats are rational).
inline mpq_class to_mpq(mpfr_srcptr x) {
    if (mpfr_zero_p(x)) return mpq_class(0);
    if (!mpfr_number_p(x)) throw std::domain_error("non-finite value in to_mpq");
    mpz_class mant;
    mpfr_exp_t e = mpfr_get_z_2exp(mant.get_mpz_t(), x);
    mpq_class q(mant);
    return q * pow2_q(static_cast<long>(e));
}

/// Closed rational enclosure [lo, hi] of a real value.
struct rat_interval {
    mpq_class lo, hi;

    mpq_class width() const { return hi - lo; }
    bool contains(const mpq_class& q) const { return lo <= q && q <= hi; }
    bool contains(const rat_interval& o) const { return lo <= o.lo && o.hi <= hi; }
    // separation predicates used by membership decisions
    bool entirely_below(const mpq_class& q) const { return hi < q; }
    bool entirely_above(const mpq_class& q) const { return lo > q; }

    double mid_double() const { return mpq_class((lo + hi) / 2).get_d(); }
};

namespace detail {

inline void set_q_dir(mpfr_ptr out, const mpq_class& q, mpfr_rnd_t rnd) {
    mpfr_set_q(out, q.get_mpq_t(), rnd);
}

} // namespace detail

/// Enclosure of base^exp for rational base > 0 and rational exp, computed by
/// corner evaluation with directed rounding at the given working precision.
inline rat_interval enclose_pow(const mpq_class& base, const mpq_class& exp, mpfr_prec_t prec) {
    if (base <= 0) throw std::domain_error("enclose_pow: base must be positive");
    big_float b1(prec), b2(prec), e1(prec), e2(prec), r(prec);
    detail::set_q_dir(b1.get(), base, MPFR_RNDD);
    detail::set_q_dir(b2.get(), base, MPFR_RNDU);
    detail::set_q_dir(e1.get(), exp, MPFR_RNDD);
    detail::set_q_dir(e2.get(), exp, MPFR_RNDU);
    bool first = true;
    mpq_class lo, hi;
    for (mpfr_srcptr bb : {b1.get(), b2.get()}) {
        for (mpfr_srcptr ee : {e1.get(), e2.get()}) {
            mpfr_pow(r.get(), bb, ee, MPFR_RNDD);
            mpq_class d = to_mpq(r.get());
            mpfr_pow(r.get(), bb, ee, MPFR_RNDU);
            mpq_class u = to_mpq(r.get());
            if (first) {
                lo = d;
                hi = u;
                first = false;
            } else {
                if (d < lo) lo = d;
                if (u > hi) hi = u;
            }
        }
    }
    return {std::move(lo), std::move(hi)};
}

/// Enclosure of n^exp for integer n >= 1 (n is exact in mpfr, so only the
/// exponent needs directed handling; x^e is monotone in e for n >= 1).
inline rat_interval enclose_uipow(std::uint64_t n, const mpq_class& exp, mpfr_prec_t prec) {
    big_float nf(prec), e1(prec), e2(prec), r(prec);
    mpfr_set_uj(nf.get(), n, MPFR_RNDN); // exact for n < 2^prec
    detail::set_q_dir(e1.get(), exp, MPFR_RNDD);
    detail::set_q_dir(e2.get(), exp, MPFR_RNDU);
    mpfr_pow(r.get(), nf.get(), e1.get(), MPFR_RNDD);
    mpq_class lo = to_mpq(r.get());
    mpfr_pow(r.get(), nf.get(), e2.get(), MPFR_RNDU);
    mpq_class hi = to_mpq(r.get());
    if (n == 0) throw std::domain_error("enclose_uipow: n >= 1 required");
    if (lo > hi) std::swap(lo, hi); // n = 1 gives the exact point 1 either way
    return {std::move(lo), std::move(hi)};
}

/// Enclosure of log2(x) for rational x > 0.
inline rat_interval enclose_log2(const mpq_class& x, mpfr_prec_t prec) {
    if (x <= 0) throw std::domain_error("enclose_log2: x must be positive");
    big_float x1(prec), x2(prec), r(prec);
    detail::set_q_dir(x1.get(), x, MPFR_RNDD);
    detail::set_q_dir(x2.get(), x, MPFR_RNDU);
    mpfr_log2(r.get(), x1.get(), MPFR_RNDD);
    mpq_class lo = to_mpq(r.get());
    mpfr_log2(r.get(), x2.get(), MPFR_RNDU);
    mpq_class hi = to_mpq(r.get());
    return {std::move(lo), std::move(hi)};
}

} // namespace retlab

#endif
