#ifndef RETLAB_DIGIT_STREAM_HPP
#define RETLAB_DIGIT_STREAM_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "retlab/errors.hpp"
#include "retlab/interval_set.hpp"
#include "retlab/rational.hpp"
#include "retlab/rng.hpp"

namespace retlab {

/// Lazy base-p digit expansion of a point of [0,1). The orbit of the point
/// under multiplication by p mod 1 is the shift on digit tails, so orbit
/// queries reduce to tail queries. Digits are materialized on demand and
/// identical replays are guaranteed for equal (base, generator, seed).
class digit_stream {
public:
    enum class source { seeded_random, fixed_list, eventually_periodic, big_real };

    static digit_stream seeded_random(std::uint32_t base, std::uint64_t seed) {
        digit_stream s(base, source::seeded_random);
        s.rng_ = counter_rng(seed);
        return s;
    }

    /// Finite digit list, zero-padded beyond the list (a terminating
    /// expansion, so the represented value is an exact rational).
    static digit_stream fixed_list(std::uint32_t base, std::vector<std::uint32_t> digits) {
        digit_stream s(base, source::fixed_list);
        for (auto d : digits)
            if (d >= base) throw std::invalid_argument("digit out of range");
        s.digits_ = std::move(digits);
        return s;
    }

    static digit_stream eventually_periodic(std::uint32_t base, std::vector<std::uint32_t> pre,
                                            std::vector<std::uint32_t> period) {
        if (period.empty()) throw std::invalid_argument("empty period");
        digit_stream s(base, source::eventually_periodic);
        bool all_max = true;
        for (auto d : period) {
            if (d >= base) throw std::invalid_argument("digit out of range");
            if (d != base - 1) all_max = false;
        }
        for (auto d : pre)
            if (d >= base) throw std::invalid_argument("digit out of range");
        if (all_max)
            throw std::invalid_argument("non-canonical expansion: period of maximal digits");
        s.pre_ = std::move(pre);
        s.period_ = std::move(period);
        return s;
    }

    /// Expansion of an exact rational x in [0, 1) by long division.
    static digit_stream big_real(std::uint32_t base, mpq_class x) {
        if (x < 0 || x >= 1) throw std::invalid_argument("big_real: x in [0,1) required");
        digit_stream s(base, source::big_real);
        s.remainder_ = std::move(x);
        return s;
    }

    std::uint32_t base() const { return base_; }
    source kind() const { return kind_; }
    std::uint64_t materialized_len() const { return digits_.size(); }

    /// d_k, 1-based. Extends the materialized prefix as needed.
    std::uint32_t digit(std::uint64_t k) {
        if (k == 0) throw std::invalid_argument("digits are 1-based");
        switch (kind_) {
        case source::seeded_random:
        case source::big_real:
            ensure(k);
            return digits_[k - 1];
        case source::fixed_list:
            return k <= digits_.size() ? digits_[k - 1] : 0;
        case source::eventually_periodic:
            if (k <= pre_.size()) return pre_[k - 1];
            return period_[(k - 1 - pre_.size()) % period_.size()];
        }
        throw std::logic_error("bad digit source");
    }

    void ensure(std::uint64_t len) {
        if (kind_ == source::seeded_random) {
            while (digits_.size() < len) {
                std::uint64_t i = digits_.size();
                digits_.push_back(static_cast<std::uint32_t>(rng_->bounded(i, base_)));
            }
        } else if (kind_ == source::big_real) {
            while (digits_.size() < len) {
                remainder_ *= base_;
                mpz_class fl;
                mpz_fdiv_q(fl.get_mpz_t(), remainder_.get_num().get_mpz_t(),
                           remainder_.get_den().get_mpz_t());
                digits_.push_back(static_cast<std::uint32_t>(fl.get_ui()));
                remainder_ -= mpq_class(fl);
            }
        }
    }

    /// Exact value of the tail 0.d_{shift+1} d_{shift+2} ... when the
    /// generator defines one; random streams have none.
    std::optional<mpq_class> exact_tail(std::uint64_t shift) const {
        switch (kind_) {
        case source::seeded_random:
            return std::nullopt;
        case source::fixed_list: {
            if (shift >= digits_.size()) return mpq_class(0);
            // Horner from the last digit inward: t = (d_i + t) / base
            mpq_class t(0);
            for (std::uint64_t i = digits_.size(); i > shift; --i) {
                t += digits_[i - 1];
                t /= base_;
            }
            t.canonicalize();
            return t;
        }
        case source::eventually_periodic: {
            // value of the purely periodic tail starting at rotation r
            auto periodic_value = [&](std::size_t r) {
                mpz_class num(0);
                for (std::size_t i = 0; i < period_.size(); ++i)
                    num = num * base_ + period_[(r + i) % period_.size()];
                mpz_class den;
                mpz_ui_pow_ui(den.get_mpz_t(), base_, period_.size());
                den -= 1;
                mpq_class v(num, den);
                v.canonicalize();
                return v;
            };
            if (shift >= pre_.size())
                return periodic_value((shift - pre_.size()) % period_.size());
            mpq_class t = periodic_value(0);
            for (std::uint64_t i = pre_.size(); i > shift; --i) {
                t += pre_[i - 1];
                t /= base_;
            }
            t.canonicalize();
            return t;
        }
        case source::big_real: {
            // frac(x * base^shift)
            mpq_class x = initial_value();
            mpz_class scale;
            mpz_ui_pow_ui(scale.get_mpz_t(), base_, static_cast<unsigned long>(shift));
            x *= mpq_class(scale);
            return frac_q(x);
        }
        }
        return std::nullopt;
    }

    /// Closed enclosure of the tail after `shift` using `count` digits:
    /// [m/p^count, (m+1)/p^count].
    rat_interval tail_enclosure(std::uint64_t shift, int count) {
        mpz_class m(0);
        for (int i = 1; i <= count; ++i) {
            m *= base_;
            m += digit(shift + i);
        }
        mpz_class den;
        mpz_ui_pow_ui(den.get_mpz_t(), base_, static_cast<unsigned long>(count));
        mpq_class lo(m, den), hi(m + 1, den);
        lo.canonicalize();
        hi.canonicalize();
        return {std::move(lo), std::move(hi)};
    }

    /// Raw access to the materialized prefix (scan fast paths).
    const std::uint32_t* materialized_data() const { return digits_.data(); }

private:
    digit_stream(std::uint32_t base, source kind) : base_(base), kind_(kind) {
        if (base < 2) throw std::invalid_argument("base >= 2 required");
        if (base > (1u << 30)) throw std::invalid_argument("base too large");
    }

    // value of a big_real stream before any digit was consumed
    mpq_class initial_value() const {
        // reconstruct: remainder_ holds x after materialized digits; rebuild
        // x = (digits prefix + remainder) / base^len
        mpq_class t = remainder_;
        for (std::uint64_t i = digits_.size(); i > 0; --i) {
            t += digits_[i - 1];
            t /= base_;
        }
        t.canonicalize();
        return t;
    }

    std::uint32_t base_;
    source kind_;
    std::vector<std::uint32_t> digits_;       // materialized (random, big_real) or the list
    std::vector<std::uint32_t> pre_, period_; // eventually periodic parts
    std::optional<counter_rng> rng_;
    mpq_class remainder_; // big_real long-division state
};

/// View of a stream shifted by a fixed offset; tail k of the view is tail
/// offset+k of the parent.
class shifted_digits {
public:
    shifted_digits(digit_stream& s, std::uint64_t offset) : s_(s), offset_(offset) {}
    std::uint32_t base() const { return s_.base(); }
    std::optional<mpq_class> exact_tail(std::uint64_t shift) const {
        return s_.exact_tail(offset_ + shift);
    }
    rat_interval tail_enclosure(std::uint64_t shift, int count) {
        return s_.tail_enclosure(offset_ + shift, count);
    }

private:
    digit_stream& s_;
    std::uint64_t offset_;
};

/// True iff the tail value after `shift` lies strictly inside the set.
/// Decision escalates digit count and endpoint precision together, doubling
/// per round up to pol.digit_cap digits past the shift.
template <typename Stream>
bool tail_in_interval(Stream& stream, std::uint64_t shift, const interval_set& set,
                      const decision_policy& pol = {}) {
    if (auto t = stream.exact_tail(shift)) return member_exact(*t, set, pol);
    return member_refinable(
        [&](int round) {
            std::int64_t count = static_cast<std::int64_t>(pol.start_digits) << round;
            if (count > pol.digit_cap * 2)
                throw precision_exhausted("digit budget exhausted (cap " +
                                          std::to_string(pol.digit_cap) + " past shift " +
                                          std::to_string(shift) + ")");
            return stream.tail_enclosure(shift,
                                         static_cast<int>(std::min<std::int64_t>(count, pol.digit_cap)));
        },
        set, pol);
}

} // namespace retlab

#endif
