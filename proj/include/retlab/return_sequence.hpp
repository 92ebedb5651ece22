#ifndef RETLAB_RETURN_SEQUENCE_HPP
#define RETLAB_RETURN_SEQUENCE_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "retlab/errors.hpp"
#include "retlab/return_scan_detail.hpp"
#include "retlab/rng.hpp"
#include "retlab/source_system.hpp"
#include "retlab/target_family.hpp"

namespace retlab {

enum class det_formula { identity, squares, power_law };

struct scan_options {
    std::uint64_t horizon = 100000000; // hard scan horizon; exceeding it is loud
    decision_policy policy;
    sampling_options sampling;
};

/// Streaming strictly increasing integer sequence: return times of a source
/// orbit into a shrinking family, the independent Bernoulli baseline, or a
/// deterministic comparison formula. Terms found so far are retained, the
/// scan position is never rewound, and equal seeds replay identical output.
class return_sequence {
public:
    static return_sequence return_times(const source_system& sys, const target_family& fam,
                                        std::uint64_t seed, scan_options opt = {}) {
        return return_times_at(sys, fam, sys.sample_point(seed, opt.sampling), opt);
    }

    /// Same, at an explicitly constructed point (fixtures, crafted orbits).
    static return_sequence return_times_at(const source_system& sys, const target_family& fam,
                                           source_point y, scan_options opt = {}) {
        return_sequence s(opt);
        s.impl_ = orbit_state{sys, fam, std::move(y)};
        return s;
    }

    /// X_n ~ Bernoulli(min(1, c n^-a)) with one addressable 64-bit draw per
    /// n, so X_n never depends on how the prefix was consumed.
    static return_sequence bernoulli(const mpq_class& a, const mpq_class& c, std::uint64_t seed,
                                     scan_options opt = {}) {
        if (a < 0 || a >= 1) throw std::invalid_argument("bernoulli: a in [0,1) required");
        if (c <= 0) throw std::invalid_argument("bernoulli: c > 0 required");
        return_sequence s(opt);
        s.impl_ = bernoulli_state{a.get_d(), c.get_d(), counter_rng(seed)};
        return s;
    }

    /// r_n = n, n^2, or floor(n^(1/(1-a))) computed in exact integers.
    static return_sequence deterministic(det_formula f, const mpq_class& a = mpq_class(0)) {
        return_sequence s({});
        if (f == det_formula::power_law) {
            if (!(a > 0 && a < 1)) throw std::invalid_argument("power-law formula needs a in (0,1)");
            mpq_class e = 1 / (1 - a); // exponent 1/(1-a) as an exact rational
            s.impl_ = formula_state{f, e};
        } else {
            s.impl_ = formula_state{f, mpq_class(1)};
        }
        return s;
    }

    /// Next term after the last one emitted. Throws scan_limit_reached when
    /// no further hit exists within the horizon.
    std::uint64_t next() {
        if (cursor_ < terms_.size()) return terms_[cursor_++];
        produce_one();
        return terms_[cursor_++];
    }

    /// i-th term, 1-based; extends the scan as needed.
    std::uint64_t term(std::uint64_t i) {
        if (i == 0) throw std::invalid_argument("terms are 1-based");
        while (terms_.size() < i) produce_one();
        return terms_[i - 1];
    }

    /// All hits <= N and their count W_N(omega). Idempotent.
    std::pair<std::vector<std::uint64_t>, std::uint64_t> up_to(std::uint64_t N) {
        std::uint64_t count = hits_up_to(N);
        std::vector<std::uint64_t> out(terms_.begin(), terms_.begin() + count);
        return {std::move(out), count};
    }

    /// W_N(omega) = number of hits among scan indices 1..N.
    std::uint64_t hits_up_to(std::uint64_t N) {
        advance_to(N);
        // terms_ is sorted; count entries <= N
        std::uint64_t count = terms_.size();
        while (count > 0 && terms_[count - 1] > N) --count;
        return count;
    }

    std::uint64_t emitted() const { return terms_.size(); }
    const std::vector<std::uint64_t>& terms() const { return terms_; }
    std::uint64_t scanned() const { return scanned_; }
    std::uint64_t last_term() const { return terms_.empty() ? 0 : terms_.back(); }

    /// Least-squares slope of log r_i against log i over term indices
    /// [n_min, n_max]; n_max is clamped to the terms actually available.
    double growth_exponent(std::uint64_t n_min, std::uint64_t n_max) {
        if (n_min < 1 || n_max < 2 * n_min)
            throw std::invalid_argument("growth fit needs n_max >= 2*n_min >= 2");
        try {
            term(n_max);
        } catch (const scan_limit_reached&) {
            // fit over what the horizon allowed
        }
        std::uint64_t hi = std::min<std::uint64_t>(n_max, terms_.size());
        if (hi < n_min || hi - n_min + 1 < 100)
            throw std::invalid_argument("insufficient terms for growth fit (need >= 100)");
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        double count = 0;
        for (std::uint64_t i = n_min; i <= hi; ++i) {
            double x = std::log(static_cast<double>(i));
            double y = std::log(static_cast<double>(terms_[i - 1]));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++count;
        }
        double denom = count * sxx - sx * sx;
        if (denom == 0) throw std::invalid_argument("degenerate growth fit");
        return (count * sxy - sx * sy) / denom;
    }

private:
    struct orbit_state {
        source_system sys;
        target_family fam;
        source_point y;
    };
    struct bernoulli_state {
        double a, c;
        counter_rng rng;
    };
    struct formula_state {
        det_formula f;
        mpq_class exponent;
    };

    explicit return_sequence(scan_options opt) : opt_(opt) {}

    // scan indices scanned_+1 .. N, recording hits
    void advance_to(std::uint64_t N) {
        if (auto* fs = std::get_if<formula_state>(&impl_)) {
            while (terms_.empty() || terms_.back() < N) {
                std::uint64_t v = formula_value(*fs, terms_.size() + 1);
                if (v > N) break;
                push_term(v);
            }
            if (scanned_ < N) scanned_ = N;
            return;
        }
        while (scanned_ < N) {
            std::uint64_t n = ++scanned_;
            if (is_hit(n)) push_term(n);
        }
    }

    void produce_one() {
        if (auto* fs = std::get_if<formula_state>(&impl_)) {
            push_term(formula_value(*fs, terms_.size() + 1));
            return;
        }
        std::uint64_t before = terms_.size();
        while (terms_.size() == before) {
            if (scanned_ >= opt_.horizon)
                throw scan_limit_reached("no hit within scan horizon " +
                                             std::to_string(opt_.horizon) +
                                             " (sequence may be finite)",
                                         scanned_);
            std::uint64_t n = ++scanned_;
            if (is_hit(n)) push_term(n);
        }
    }

    bool is_hit(std::uint64_t n) {
        if (auto* bs = std::get_if<bernoulli_state>(&impl_)) {
            double p = bs->c * std::pow(static_cast<double>(n), -bs->a);
            if (p >= 1.0) return true;
            auto bound = static_cast<std::uint64_t>(p * 18446744073709551616.0);
            return bs->rng.word(n) < bound;
        }
        auto& os = std::get<orbit_state>(impl_);
        // power map into a single (0, tau) component: reject on any nonzero
        // digit among the leading positions that tau provably cannot reach
        if (os.sys.kind() == source_system::kind_t::power && os.fam.single_upper_family()) {
            auto& stream = std::get<digit_stream>(os.y);
            const auto& d = os.fam.upper_bound_dyad(n, stream.base());
            if (d.lead_zero_digits > 0) {
                stream.ensure(n + d.lead_zero_digits);
                const std::uint32_t* digits = stream.materialized_data();
                for (std::uint32_t k = 0; k < d.lead_zero_digits; ++k)
                    if (digits[n + k] != 0) return false;
            }
        }
        return os.sys.orbit_membership(os.y, n, os.fam.target_set(n), opt_.policy);
    }

    static std::uint64_t formula_value(const formula_state& fs, std::uint64_t i) {
        switch (fs.f) {
        case det_formula::identity: return i;
        case det_formula::squares: return i * i;
        case det_formula::power_law: return detail::floor_rational_power(i, fs.exponent);
        }
        throw std::logic_error("bad formula");
    }

    void push_term(std::uint64_t v) {
        if (!terms_.empty() && v <= terms_.back())
            throw std::logic_error("return sequence not strictly increasing");
        terms_.push_back(v);
    }

    scan_options opt_;
    std::variant<std::monostate, orbit_state, bernoulli_state, formula_state> impl_;
    std::vector<std::uint64_t> terms_;
    std::uint64_t scanned_ = 0;
    std::uint64_t cursor_ = 0;
};

} // namespace retlab

#endif
