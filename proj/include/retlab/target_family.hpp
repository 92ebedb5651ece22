#ifndef RETLAB_TARGET_FAMILY_HPP
#define RETLAB_TARGET_FAMILY_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "retlab/interval_set.hpp"
#include "retlab/source_system.hpp"
#include "retlab/summation.hpp"
#include "retlab/threshold.hpp"

namespace retlab {

enum class family_kind { shrinking, gauss_shrinking, centered_ball, constant_set, finite_union };

/// Descriptor of the shrinking target sequence E_1, E_2, ... with exact set
/// geometry and closed-form measures.
class target_family {
public:
    /// E_n = (0, c n^-a), Lebesgue measure c n^-a.
    static target_family shrinking_interval(mpq_class c, mpq_class a) {
        check_exponent(a);
        if (c <= 0 || c > 1)
            throw std::invalid_argument("shrinking interval: c in (0,1] required so E_n fits [0,1)");
        target_family f(family_kind::shrinking);
        f.c_ = std::move(c);
        f.a_ = std::move(a);
        return f;
    }

    /// E_n = (0, b^(n^-a) - 1), Gauss measure n^-a log2(b).
    static target_family gauss_shrinking(mpq_class b, mpq_class a) {
        check_exponent(a);
        if (b <= 1 || b > 2)
            throw std::invalid_argument("gauss shrinking: b in (1,2] required so E_n fits [0,1)");
        target_family f(family_kind::gauss_shrinking);
        f.b_ = std::move(b);
        f.a_ = std::move(a);
        return f;
    }

    /// E_n = ball of radius n^-a / 2 around 0 mod 1, i.e. up to two
    /// intervals (0, r) and (1-r, 1) with exact endpoints.
    static target_family centered_ball(mpq_class a) {
        check_exponent(a);
        target_family f(family_kind::centered_ball);
        f.a_ = std::move(a);
        return f;
    }

    /// E_n = fixed set for all n (rational endpoints).
    static target_family constant_set(std::vector<std::pair<mpq_class, mpq_class>> intervals) {
        if (intervals.empty()) throw std::invalid_argument("constant set: need >= 1 interval");
        target_family f(family_kind::constant_set);
        for (auto& [lo, hi] : intervals) {
            if (lo < 0 || hi > 1 || lo >= hi)
                throw std::invalid_argument("constant set: need 0 <= lo < hi <= 1");
            f.const_set_.push_back({threshold::constant(lo), threshold::constant(hi), 1});
        }
        validate_disjoint(f.const_set_);
        return f;
    }

    /// Union of a fixed list of interval-valued generators (component count
    /// bounded by the list length for every n).
    static target_family finite_union(std::vector<std::pair<threshold, threshold>> components) {
        if (components.empty()) throw std::invalid_argument("finite union: need >= 1 component");
        target_family f(family_kind::finite_union);
        f.union_spec_ = std::move(components);
        return f;
    }

    family_kind kind() const { return kind_; }
    const mpq_class& a() const { return a_; }
    const mpq_class& c() const { return c_; }
    const mpq_class& b() const { return b_; }

    std::size_t component_bound() const {
        switch (kind_) {
        case family_kind::shrinking:
        case family_kind::gauss_shrinking: return 1;
        case family_kind::centered_ball: return 2;
        case family_kind::constant_set: return const_set_.size();
        case family_kind::finite_union: return union_spec_.size();
        }
        throw std::logic_error("bad family kind");
    }

    interval_set target_set(std::uint64_t n) const {
        if (n < 1) throw std::invalid_argument("target index n >= 1 required");
        switch (kind_) {
        case family_kind::shrinking:
            return {{threshold::constant(mpq_class(0)), threshold::power_law(c_, a_), n}};
        case family_kind::gauss_shrinking:
            return {{threshold::constant(mpq_class(0)), threshold::gauss_pow(b_, a_), n}};
        case family_kind::centered_ball: {
            threshold r = threshold::half_power(a_);
            interval_set s;
            s.push_back({threshold::constant(mpq_class(0)), r, n});
            s.push_back({r.complemented(), threshold::constant(mpq_class(1)), n});
            return s;
        }
        case family_kind::constant_set: {
            interval_set s = const_set_;
            for (auto& iv : s) iv.n = n;
            return s;
        }
        case family_kind::finite_union: {
            interval_set s;
            for (const auto& [lo, hi] : union_spec_) s.push_back({lo, hi, n});
            return s;
        }
        }
        throw std::logic_error("bad family kind");
    }

    /// nu(E_n) under the system's invariant measure. Pairings without a
    /// closed form under that measure are rejected.
    double measure(std::uint64_t n, const source_system& sys) const {
        check_compat(sys);
        switch (kind_) {
        case family_kind::shrinking:
            return c_.get_d() * std::pow(static_cast<double>(n), -a_.get_d());
        case family_kind::gauss_shrinking:
            return std::pow(static_cast<double>(n), -a_.get_d()) * std::log2(b_.get_d());
        case family_kind::centered_ball:
            return std::pow(static_cast<double>(n), -a_.get_d());
        case family_kind::constant_set:
        case family_kind::finite_union:
            return sys.measure(target_set(n));
        }
        throw std::logic_error("bad family kind");
    }

    rat_interval measure_enclosure(std::uint64_t n, const source_system& sys, int prec) const {
        check_compat(sys);
        switch (kind_) {
        case family_kind::shrinking: {
            rat_interval p = enclose_uipow(n, mpq_class(-a_), prec + 16);
            return {c_ * p.lo, c_ * p.hi};
        }
        case family_kind::gauss_shrinking: {
            rat_interval p = enclose_uipow(n, mpq_class(-a_), prec + 16);
            rat_interval l = enclose_log2(b_, prec + 16);
            return {p.lo * l.lo, p.hi * l.hi};
        }
        case family_kind::centered_ball:
            return enclose_uipow(n, mpq_class(-a_), prec + 16);
        default:
            return sys.measure_enclosure(target_set(n), prec);
        }
    }

    /// W_N = sum of nu(E_n) for n <= N, compensated summation, extended
    /// incrementally with geometric snapshots so prefix sums are never
    /// recomputed from scratch.
    double cumulative(std::uint64_t N, const source_system& sys) {
        check_compat(sys);
        if (N < cum_n_) {
            // rewind to the last snapshot at or below N
            cum_sum_ = kahan_sum();
            cum_n_ = 0;
            for (const auto& [sn, sv] : cum_snapshots_) {
                if (sn <= N && sn > cum_n_) {
                    cum_n_ = sn;
                    cum_sum_ = sv;
                }
            }
        }
        while (cum_n_ < N) {
            ++cum_n_;
            cum_sum_ += measure(cum_n_, sys);
            if (cum_snapshots_.empty() || cum_n_ >= cum_snapshots_.back().first * 2)
                cum_snapshots_.emplace_back(cum_n_, cum_sum_);
        }
        return cum_sum_.value();
    }

    /// Fast-scan eligibility: a single component whose lower endpoint is 0,
    /// so membership is "tail below an upper threshold".
    bool single_upper_family() const {
        return kind_ == family_kind::shrinking || kind_ == family_kind::gauss_shrinking;
    }

    /// Packed conservative upper bound tau <= mant * 2^e with a precomputed
    /// count of leading digits (in the given base) that must all be zero for
    /// a tail to stand any chance of lying below tau.
    struct upper_dyad {
        std::uint64_t mant;
        std::int32_t e;
        std::uint32_t lead_zero_digits;
    };

    const upper_dyad& upper_bound_dyad(std::uint64_t n, std::uint32_t base) {
        if (!single_upper_family()) throw std::logic_error("no single upper threshold");
        if (dyad_base_ != base) {
            dyads_.clear();
            dyad_base_ = base;
        }
        if (n > dyads_.size()) {
            double log2p = std::log2(static_cast<double>(base));
            if (dyads_.capacity() < n)
                dyads_.reserve(std::max<std::size_t>(n, dyads_.capacity() * 2));
            // one upward-rounded pow per index, exponent prepared once
            const mpfr_prec_t prec = 96;
            big_float e_up(prec), nf(prec), r(prec), b_up(prec), t(prec);
            mpfr_set_q(e_up.get(), mpq_class(-a_).get_mpq_t(), MPFR_RNDU);
            if (kind_ == family_kind::gauss_shrinking)
                mpfr_set_q(b_up.get(), b_.get_mpq_t(), MPFR_RNDU);
            for (std::uint64_t m = dyads_.size() + 1; m <= n; ++m) {
                mpfr_set_uj(nf.get(), m, MPFR_RNDN); // exact
                mpfr_pow(t.get(), nf.get(), e_up.get(), MPFR_RNDU);
                mpq_class hi;
                if (kind_ == family_kind::shrinking) {
                    hi = c_ * to_mpq(t.get());
                } else {
                    mpfr_pow(r.get(), b_up.get(), t.get(), MPFR_RNDU);
                    hi = to_mpq(r.get()) - 1;
                }
                dyads_.push_back(pack_upper(hi, log2p));
            }
        }
        return dyads_[n - 1];
    }

private:
    explicit target_family(family_kind k) : kind_(k) {}

    // The boundary a = 1/2 is admitted as a comparison family (the random
    // analogue of n^2) even though the convergence theory needs a < 1/2.
    static void check_exponent(const mpq_class& a) {
        if (!(a > 0 && a <= make_q(1, 2)))
            throw std::invalid_argument("shrinking exponent a must lie in (0, 1/2]");
    }

    void check_compat(const source_system& sys) const {
        auto mk = sys.measure_kind();
        switch (kind_) {
        case family_kind::shrinking:
        case family_kind::centered_ball:
        case family_kind::finite_union:
            if (mk != source_system::measure_t::lebesgue)
                throw std::invalid_argument("family requires a Lebesgue-measure source");
            return;
        case family_kind::gauss_shrinking:
            if (mk != source_system::measure_t::gauss)
                throw std::invalid_argument("gauss shrinking family requires the Gauss map");
            return;
        case family_kind::constant_set:
            return; // any source; the Markov shift ignores the geometry
        }
    }

    static upper_dyad pack_upper(const mpq_class& hi, double log2p) {
        // choose e so that mant = ceil(hi / 2^e) fits in 63 bits
        long bits = static_cast<long>(mpz_sizeinbase(hi.get_num().get_mpz_t(), 2)) -
                    static_cast<long>(mpz_sizeinbase(hi.get_den().get_mpz_t(), 2));
        std::int32_t e = static_cast<std::int32_t>(bits - 61);
        mpz_class mant;
        for (;;) {
            mpz_class num = hi.get_num(), den = hi.get_den();
            if (e <= 0)
                mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), static_cast<unsigned long>(-e));
            else
                mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), static_cast<unsigned long>(e));
            mpz_cdiv_q(mant.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
            if (mpz_sizeinbase(mant.get_mpz_t(), 2) <= 63) break;
            ++e;
        }
        upper_dyad d;
        d.mant = mant.get_ui();
        d.e = e;
        d.lead_zero_digits = 0;
        if (e + 64 < 0)
            d.lead_zero_digits = static_cast<std::uint32_t>(
                std::floor(-static_cast<double>(e + 64) / log2p));
        return d;
    }

    family_kind kind_;
    mpq_class a_, c_, b_;
    interval_set const_set_;
    std::vector<std::pair<threshold, threshold>> union_spec_;

    // per-instance caches (not shared between experiments)
    kahan_sum cum_sum_;
    std::uint64_t cum_n_ = 0;
    std::vector<std::pair<std::uint64_t, kahan_sum>> cum_snapshots_;
    std::vector<upper_dyad> dyads_;
    std::uint32_t dyad_base_ = 0;
};

} // namespace retlab

#endif
