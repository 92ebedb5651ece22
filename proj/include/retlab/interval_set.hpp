#ifndef RETLAB_INTERVAL_SET_HPP
#define RETLAB_INTERVAL_SET_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "retlab/bigfloat.hpp"
#include "retlab/errors.hpp"
#include "retlab/threshold.hpp"

namespace retlab {

/// One open interval (lo, hi) of a target set, instantiated at scan index n.
struct open_interval {
    threshold lo, hi;
    std::uint64_t n = 1;

    rat_interval lo_enclosure(int prec) const { return lo.eval(n, prec); }
    rat_interval hi_enclosure(int prec) const { return hi.eval(n, prec); }
};

/// A finite union of disjoint open intervals in [0, 1).
using interval_set = std::vector<open_interval>;

/// Caps for membership decisions. Undecidable comparisons are measure-zero
/// events for random points; the caps turn them into loud errors.
struct decision_policy {
    int start_digits = 32;       // digits examined before the first verdict attempt
    int digit_cap = 4096;        // max digits past the shift (doubling escalation)
    int quotient_cap = 512;      // max partial quotients past the shift
    int threshold_prec = 64;     // initial endpoint enclosure precision (bits)
    int max_rounds = 16;         // escalation rounds (each doubles budgets)
};

enum class region { inside, outside, unknown };

namespace detail {

// Position of an exactly known value relative to one open interval.
// Endpoint hits resolve to outside (open-interval policy).
inline region classify_exact(const mpq_class& t, const open_interval& iv,
                             const decision_policy& pol) {
    int prec = pol.threshold_prec;
    for (int round = 0; round < pol.max_rounds; ++round, prec *= 2) {
        rat_interval lo = iv.lo_enclosure(prec);
        rat_interval hi = iv.hi_enclosure(prec);
        if (t > lo.hi && t < hi.lo) return region::inside;
        if (t < lo.lo || t > hi.hi) return region::outside;
        if (lo.contains(t) && iv.lo.equals_exactly(t, iv.n)) return region::outside;
        if (hi.contains(t) && iv.hi.equals_exactly(t, iv.n)) return region::outside;
    }
    throw precision_exhausted("endpoint comparison undecided for exact value vs " +
                              iv.lo.describe() + ".." + iv.hi.describe());
}

// Position of an enclosed value [t.lo, t.hi] relative to one open interval,
// with endpoints known to precision `prec`. Never guesses.
inline region classify_enclosure(const rat_interval& t, const open_interval& iv, int prec) {
    rat_interval lo = iv.lo_enclosure(prec);
    rat_interval hi = iv.hi_enclosure(prec);
    if (t.lo > lo.hi && t.hi < hi.lo) return region::inside;
    if (t.hi < lo.lo || t.lo > hi.hi) return region::outside;
    return region::unknown;
}

} // namespace detail

/// Decide membership of an exactly known rational value in the set.
inline bool member_exact(const mpq_class& t, const interval_set& set,
                         const decision_policy& pol = {}) {
    for (const auto& iv : set) {
        region r = detail::classify_exact(t, iv, pol);
        if (r == region::inside) return true;
    }
    return false;
}

/// Decide membership of a lazily refinable value. `refine(round)` must
/// return a (weakly shrinking) rational enclosure of the value and may throw
/// precision_exhausted when its own budget runs out.
template <typename Refine>
bool member_refinable(Refine&& refine, const interval_set& set,
                      const decision_policy& pol = {}) {
    std::vector<region> status(set.size(), region::unknown);
    int prec = pol.threshold_prec;
    for (int round = 0; round < pol.max_rounds; ++round, prec *= 2) {
        rat_interval t = refine(round);
        bool all_outside = true;
        for (std::size_t i = 0; i < set.size(); ++i) {
            if (status[i] == region::outside) continue;
            status[i] = detail::classify_enclosure(t, set[i], prec);
            if (status[i] == region::inside) return true;
            if (status[i] != region::outside) all_outside = false;
        }
        if (all_outside) return false;
    }
    throw precision_exhausted("membership undecided after " +
                              std::to_string(pol.max_rounds) + " escalation rounds");
}

/// Reject sets whose components cannot be proven pairwise disjoint.
inline void validate_disjoint(const interval_set& set, const decision_policy& pol = {}) {
    // All sets in scope have few components; quadratic is fine.
    for (std::size_t i = 0; i < set.size(); ++i) {
        for (std::size_t j = i + 1; j < set.size(); ++j) {
            bool ok = false;
            int prec = pol.threshold_prec;
            for (int round = 0; round < 6 && !ok; ++round, prec *= 2) {
                rat_interval hi_i = set[i].hi_enclosure(prec);
                rat_interval lo_j = set[j].lo_enclosure(prec);
                rat_interval hi_j = set[j].hi_enclosure(prec);
                rat_interval lo_i = set[i].lo_enclosure(prec);
                if (hi_i.hi <= lo_j.lo || hi_j.hi <= lo_i.lo) ok = true;
                // touching endpoints with exactly equal values are disjoint
                // as open intervals
                auto ei = set[i].hi.exact_value(set[i].n);
                auto ej = set[j].lo.exact_value(set[j].n);
                if (ei && ej && *ei <= *ej) ok = true;
            }
            if (!ok) throw std::invalid_argument("interval set components overlap");
        }
    }
}

} // namespace retlab

#endif
