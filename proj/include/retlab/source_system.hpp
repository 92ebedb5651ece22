#ifndef RETLAB_SOURCE_SYSTEM_HPP
#define RETLAB_SOURCE_SYSTEM_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <variant>

#include "retlab/cf_stream.hpp"
#include "retlab/digit_stream.hpp"
#include "retlab/interval_set.hpp"
#include "retlab/markov.hpp"
#include "retlab/rational.hpp"

namespace retlab {

inline int ceil_log2_u64(std::uint64_t n) {
    int b = 0;
    while ((std::uint64_t{1} << b) < n && b < 63) ++b;
    return b;
}

/// Enclosure of frac(y + n*alpha) refined until it does not straddle an
/// integer. Exact rational y plus a convergent enclosure of alpha keeps the
/// rotation an isometry at every precision level.
inline rat_interval rotation_orbit_enclosure(const mpq_class& y, cf_stream& alpha,
                                             std::uint64_t n, int precision_bits) {
    int prec = precision_bits + ceil_log2_u64(n ? n : 1) + 2;
    for (int round = 0; round < 24; ++round, prec *= 2) {
        rat_interval a = alpha.value_enclosure(prec);
        mpq_class lo = y + static_cast<unsigned long>(n) * a.lo;
        mpq_class hi = y + static_cast<unsigned long>(n) * a.hi;
        mpz_class fl_lo, fl_hi;
        mpz_fdiv_q(fl_lo.get_mpz_t(), lo.get_num().get_mpz_t(), lo.get_den().get_mpz_t());
        mpz_fdiv_q(fl_hi.get_mpz_t(), hi.get_num().get_mpz_t(), hi.get_den().get_mpz_t());
        if (fl_lo == fl_hi) {
            mpq_class f(fl_lo);
            return {lo - f, hi - f};
        }
        // straddles an integer; only happens with the orbit point next to 0
    }
    throw precision_exhausted("rotation orbit enclosure straddles an integer at n=" +
                              std::to_string(n));
}

/// A point of the source system, carrying its own lazily extended orbit
/// representation (single-writer; no shared mutable state).
struct rotation_point {
    mpq_class y;
    cf_stream alpha; // working copy of the rotation angle
};

using source_point = std::variant<digit_stream, cf_stream, rotation_point, markov_path>;

struct sampling_options {
    int rotation_bits = 256; // dyadic resolution of a random rotation point
    int cf_bits = cf_stream::default_seed_bits;
};

/// The measure-preserving source (Y, nu, S) whose orbit generates hits.
class source_system {
public:
    enum class kind_t { power, gauss, rotation, markov };
    enum class measure_t { lebesgue, gauss, stationary };

    static source_system power_map(std::uint32_t p) {
        if (p < 2) throw std::invalid_argument("power map needs p >= 2");
        source_system s(kind_t::power);
        s.p_ = p;
        return s;
    }

    static source_system gauss_map() { return source_system(kind_t::gauss); }

    /// Rotation by the irrational with the given continued fraction. The
    /// badly-approximable flag is set iff the quotients are bounded, which
    /// is known exactly for periodic expansions.
    static source_system rotation_map(cf_stream alpha) {
        if (alpha.is_finite())
            throw std::invalid_argument("rotation angle must be irrational (infinite cf)");
        source_system s(kind_t::rotation);
        s.alpha_ = std::move(alpha);
        return s;
    }

    static source_system markov_shift(markov_chain chain, std::uint64_t event_mask,
                                      std::optional<std::uint32_t> start = std::nullopt) {
        if (event_mask == 0) throw std::invalid_argument("empty symbol event");
        source_system s(kind_t::markov);
        s.chain_ = std::move(chain);
        s.event_mask_ = event_mask;
        s.start_ = start;
        return s;
    }

    kind_t kind() const { return kind_; }
    measure_t measure_kind() const {
        switch (kind_) {
        case kind_t::power:
        case kind_t::rotation: return measure_t::lebesgue;
        case kind_t::gauss: return measure_t::gauss;
        case kind_t::markov: return measure_t::stationary;
        }
        throw std::logic_error("bad kind");
    }

    std::uint32_t power_base() const { return p_; }
    const cf_stream& alpha() const { return *alpha_; }
    const markov_chain& chain() const { return *chain_; }
    std::uint64_t event_mask() const { return event_mask_; }

    bool badly_approximable(std::uint64_t bound) const {
        if (kind_ != kind_t::rotation) throw std::logic_error("not a rotation");
        cf_stream a = *alpha_;
        // decidable exactly for periodic angles; declared via bound otherwise
        return a.quotient_bound() <= bound;
    }

    /// Draw a nu-random point. Random y for the power map is i.i.d. uniform
    /// digits; for the Gauss map a uniform dyadic real at cf_bits bits with
    /// quotients extracted on demand (Gauss and Lebesgue measure are
    /// equivalent, and all the statements verified here are a.e. ones).
    source_point sample_point(std::uint64_t seed, const sampling_options& opt = {}) const {
        switch (kind_) {
        case kind_t::power:
            return digit_stream::seeded_random(p_, seed);
        case kind_t::gauss:
            return cf_stream::from_uniform(seed, opt.cf_bits);
        case kind_t::rotation:
            return rotation_point{uniform_dyadic(counter_rng(seed), opt.rotation_bits), *alpha_};
        case kind_t::markov:
            return markov_path(*chain_, seed, start_);
        }
        throw std::logic_error("bad kind");
    }

    /// Exact truth of S^n y in E (for the Markov shift: state_n in the
    /// system's symbol event; the interval argument is not consulted).
    bool orbit_membership(source_point& y, std::uint64_t n, const interval_set& set,
                          const decision_policy& pol = {}) const {
        if (n < 1) throw std::invalid_argument("orbit index n >= 1 required");
        switch (kind_) {
        case kind_t::power:
            return tail_in_interval(std::get<digit_stream>(y), n, set, pol);
        case kind_t::gauss:
            return cf_tail_in_interval(std::get<cf_stream>(y), n, set, pol);
        case kind_t::rotation: {
            auto& pt = std::get<rotation_point>(y);
            return member_refinable(
                [&](int round) {
                    return rotation_orbit_enclosure(pt.y, pt.alpha, n,
                                                    pol.threshold_prec << round);
                },
                set, pol);
        }
        case kind_t::markov: {
            auto& path = std::get<markov_path>(y);
            return (event_mask_ >> path.state(n)) & 1;
        }
        }
        throw std::logic_error("bad kind");
    }

    /// nu(E): exact rational for rational-endpoint Lebesgue sets and for the
    /// Markov shift; a <= 2^-prec enclosure otherwise.
    rat_interval measure_enclosure(const interval_set& set, int prec = 96) const {
        switch (measure_kind()) {
        case measure_t::lebesgue: {
            mpq_class lo(0), hi(0);
            for (const auto& iv : set) {
                rat_interval l = iv.lo_enclosure(prec + 4);
                rat_interval h = iv.hi_enclosure(prec + 4);
                lo += h.lo - l.hi;
                hi += h.hi - l.lo;
            }
            if (lo > hi) std::swap(lo, hi);
            return {std::move(lo), std::move(hi)};
        }
        case measure_t::gauss: {
            // closed form: integral of 1/((1+x) ln 2) over (lo, hi) is
            // log2((1+hi)/(1+lo)); never numerical quadrature
            mpq_class lo(0), hi(0);
            for (const auto& iv : set) {
                rat_interval l = iv.lo_enclosure(prec + 4);
                rat_interval h = iv.hi_enclosure(prec + 4);
                rat_interval ratio_lo = enclose_log2(mpq_class((1 + h.lo) / (1 + l.hi)), prec + 8);
                rat_interval ratio_hi = enclose_log2(mpq_class((1 + h.hi) / (1 + l.lo)), prec + 8);
                lo += ratio_lo.lo;
                hi += ratio_hi.hi;
            }
            if (lo > hi) std::swap(lo, hi);
            return {std::move(lo), std::move(hi)};
        }
        case measure_t::stationary: {
            mpq_class m = chain_->stationary_mass(event_mask_);
            return {m, m};
        }
        }
        throw std::logic_error("bad measure kind");
    }

    std::optional<mpq_class> measure_exact(const interval_set& set) const {
        if (measure_kind() == measure_t::stationary)
            return chain_->stationary_mass(event_mask_);
        if (measure_kind() != measure_t::lebesgue) return std::nullopt;
        mpq_class total(0);
        for (const auto& iv : set) {
            auto lo = iv.lo.exact_value(iv.n);
            auto hi = iv.hi.exact_value(iv.n);
            if (!lo || !hi) return std::nullopt;
            total += *hi - *lo;
        }
        return total;
    }

    double measure(const interval_set& set) const {
        validate_disjoint(set);
        if (auto m = measure_exact(set)) return m->get_d();
        return measure_enclosure(set, 64).mid_double();
    }

private:
    explicit source_system(kind_t k) : kind_(k) {}

    kind_t kind_;
    std::uint32_t p_ = 2;
    std::optional<cf_stream> alpha_;
    std::optional<markov_chain> chain_;
    std::uint64_t event_mask_ = 0;
    std::optional<std::uint32_t> start_;
};

} // namespace retlab

#endif
