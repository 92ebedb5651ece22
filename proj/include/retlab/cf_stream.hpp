#ifndef RETLAB_CF_STREAM_HPP
#define RETLAB_CF_STREAM_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "retlab/errors.hpp"
#include "retlab/interval_set.hpp"
#include "retlab/rational.hpp"
#include "retlab/rng.hpp"

namespace retlab {

/// Lazy continued-fraction expansion [0; a_1, a_2, ...] of a point of (0,1).
/// The Gauss-map orbit of the point is the shift on partial-quotient tails.
///
/// The seeded generator draws a uniform dyadic real at a fixed bit budget
/// and extracts quotients while the enclosing interval still determines
/// them; extraction past that point raises precision_exhausted. Quotients
/// cost about 3.42 bits each on average, so the default 4096-bit budget
/// over-provisions the default 512-quotient decision cap by a factor of 2.
class cf_stream {
public:
    static constexpr int default_seed_bits = 4096;

    /// Terminating expansion: an exact rational in (0,1). Gauss-map tails
    /// past the last quotient are absorbed at 0.
    static cf_stream fixed_list(std::vector<std::uint64_t> quotients) {
        cf_stream s(kind_t::fixed);
        validate(quotients);
        s.quotients_ = std::move(quotients);
        return s;
    }

    /// Purely periodic expansion (a quadratic irrational), e.g. {1} for the
    /// golden-mean conjugate or {2} for sqrt(2)-1.
    static cf_stream periodic(std::vector<std::uint64_t> period) {
        if (period.empty()) throw std::invalid_argument("empty period");
        cf_stream s(kind_t::periodic);
        validate(period);
        s.quotients_ = std::move(period);
        return s;
    }

    /// Quotients of a uniform random real sampled at `bits` binary digits.
    static cf_stream from_uniform(std::uint64_t seed, int bits = default_seed_bits) {
        if (bits < 64) throw std::invalid_argument("seed bits too small");
        cf_stream s(kind_t::sampled);
        counter_rng rng(seed);
        s.win_lo_ = uniform_dyadic(rng, bits);
        s.win_hi_ = s.win_lo_ + pow2_q(-bits);
        if (s.win_lo_ == 0) s.win_lo_ = pow2_q(-bits - 1); // avoid the rational 0 corner
        return s;
    }

    bool is_finite() const { return kind_ == kind_t::fixed; }
    std::uint64_t finite_length() const { return quotients_.size(); }
    std::uint64_t materialized_len() const { return kind_ == kind_t::sampled ? quotients_.size() : 0; }

    /// a_k, 1-based. All quotients are >= 1. Periodic streams never run out;
    /// finite streams throw std::out_of_range past the end; sampled streams
    /// throw precision_exhausted when the bit budget no longer decides.
    std::uint64_t quotient(std::uint64_t k) {
        if (k == 0) throw std::invalid_argument("quotients are 1-based");
        switch (kind_) {
        case kind_t::fixed:
            if (k > quotients_.size()) throw std::out_of_range("finite continued fraction");
            return quotients_[k - 1];
        case kind_t::periodic:
            return quotients_[(k - 1) % quotients_.size()];
        case kind_t::sampled:
            while (quotients_.size() < k) extract_next();
            return quotients_[k - 1];
        }
        throw std::logic_error("bad cf kind");
    }

    std::uint64_t quotient_bound() const {
        if (kind_ != kind_t::periodic) throw std::logic_error("bound only for periodic streams");
        std::uint64_t m = 0;
        for (auto a : quotients_) m = std::max(m, a);
        return m;
    }

    /// Exact value of the Gauss-orbit tail after `shift` when defined
    /// (finite expansions only; 0 past the end).
    std::optional<mpq_class> exact_tail(std::uint64_t shift) {
        if (kind_ != kind_t::fixed) return std::nullopt;
        if (shift >= quotients_.size()) return mpq_class(0);
        mpq_class t(0);
        for (std::uint64_t i = quotients_.size(); i > shift; --i) {
            t += static_cast<unsigned long>(quotients_[i - 1]);
            t = 1 / t;
        }
        t.canonicalize();
        return t;
    }

    /// Enclosure of the tail value [0; a_{shift+1}, ..., a_{shift+count}]
    /// from two consecutive convergents. Width is ~ Levy-exponentially small
    /// in count.
    rat_interval tail_enclosure(std::uint64_t shift, int count) {
        if (kind_ == kind_t::fixed && shift + count > quotients_.size())
            count = static_cast<int>(quotients_.size() - std::min<std::uint64_t>(shift, quotients_.size()));
        if (count < 1) {
            auto t = exact_tail(shift);
            if (t) return {*t, *t};
            throw std::invalid_argument("need at least one quotient");
        }
        mpz_class h_prev(1), h(0), k_prev(0), k(1); // c_0 = 0/1
        for (int j = 1; j <= count; ++j) {
            unsigned long a = static_cast<unsigned long>(quotient(shift + j));
            mpz_class h_next = a * h + h_prev;
            mpz_class k_next = a * k + k_prev;
            h_prev = h;
            h = h_next;
            k_prev = k;
            k = k_next;
        }
        mpq_class c_last(h, k), c_before(h_prev, k_prev);
        c_last.canonicalize();
        c_before.canonicalize();
        if (c_last <= c_before) return {std::move(c_last), std::move(c_before)};
        return {std::move(c_before), std::move(c_last)};
    }

    /// Enclosure of the represented value with width <= 2^(-precision_bits).
    rat_interval value_enclosure(int precision_bits) {
        mpq_class tol = pow2_q(-precision_bits);
        int count = 8;
        for (;;) {
            rat_interval r = tail_enclosure(0, count);
            if (r.width() <= tol) return r;
            if (kind_ == kind_t::fixed && static_cast<std::uint64_t>(count) >= quotients_.size())
                return r; // exact point
            count *= 2;
            if (count > (1 << 22)) throw precision_exhausted("convergent budget exhausted");
        }
    }

    /// Convergent p_k/q_k of the full expansion (1-based k), cached.
    mpq_class convergent(std::uint64_t k) {
        mpz_class h_prev(1), h(0), k_prev(0), kk(1);
        for (std::uint64_t j = 1; j <= k; ++j) {
            unsigned long a = static_cast<unsigned long>(quotient(j));
            mpz_class h_next = a * h + h_prev;
            mpz_class k_next = a * kk + k_prev;
            h_prev = h;
            h = h_next;
            k_prev = kk;
            kk = k_next;
        }
        mpq_class c(h, kk);
        c.canonicalize();
        return c;
    }

private:
    enum class kind_t { fixed, periodic, sampled };

    explicit cf_stream(kind_t k) : kind_(k) {}

    static void validate(const std::vector<std::uint64_t>& qs) {
        for (auto a : qs)
            if (a < 1) throw std::invalid_argument("partial quotients must be >= 1");
    }

    void extract_next() {
        // next quotient = floor(1/x) where x ranges over the window;
        // window endpoints disagreeing on it means the bits are spent
        if (win_lo_ <= 0)
            throw precision_exhausted("cf sampler: bit budget exhausted after " +
                                      std::to_string(quotients_.size()) + " quotients");
        mpq_class inv_hi = 1 / win_lo_;
        mpq_class inv_lo = 1 / win_hi_;
        mpz_class a_lo, a_hi;
        mpz_fdiv_q(a_lo.get_mpz_t(), inv_lo.get_num().get_mpz_t(), inv_lo.get_den().get_mpz_t());
        mpz_fdiv_q(a_hi.get_mpz_t(), inv_hi.get_num().get_mpz_t(), inv_hi.get_den().get_mpz_t());
        if (a_lo != a_hi || !a_lo.fits_ulong_p())
            throw precision_exhausted("cf sampler: bit budget exhausted after " +
                                      std::to_string(quotients_.size()) + " quotients");
        unsigned long a = a_lo.get_ui();
        if (a < 1) throw precision_exhausted("cf sampler: window not in (0,1)");
        quotients_.push_back(a);
        mpq_class nlo = inv_lo - static_cast<long>(a);
        mpq_class nhi = inv_hi - static_cast<long>(a);
        win_lo_ = std::move(nlo);
        win_hi_ = std::move(nhi);
    }

    kind_t kind_;
    std::vector<std::uint64_t> quotients_;
    mpq_class win_lo_, win_hi_; // sampler state: x in [win_lo_, win_hi_]
};

/// True iff the Gauss-orbit tail after `shift` lies strictly inside the set.
inline bool cf_tail_in_interval(cf_stream& stream, std::uint64_t shift, const interval_set& set,
                                const decision_policy& pol = {}) {
    if (auto t = stream.exact_tail(shift)) return member_exact(*t, set, pol);
    return member_refinable(
        [&](int round) {
            std::int64_t count = std::int64_t{8} << round;
            if (count > pol.quotient_cap * 2)
                throw precision_exhausted("quotient budget exhausted (cap " +
                                          std::to_string(pol.quotient_cap) + " past shift " +
                                          std::to_string(shift) + ")");
            return stream.tail_enclosure(
                shift, static_cast<int>(std::min<std::int64_t>(count, pol.quotient_cap)));
        },
        set, pol);
}

} // namespace retlab

#endif
