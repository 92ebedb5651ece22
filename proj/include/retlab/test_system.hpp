#ifndef RETLAB_TEST_SYSTEM_HPP
#define RETLAB_TEST_SYSTEM_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "retlab/cf_stream.hpp"
#include "retlab/digit_stream.hpp"
#include "retlab/source_system.hpp"
#include "retlab/summation.hpp"

namespace retlab {

/// Point of a target system. Rotation points carry a working copy of the
/// angle so lazy convergent extension never mutates shared state.
struct torus_point {
    mpq_class x;
    cf_stream beta;
};

struct test_point;
using test_point_list = std::vector<test_point>;

struct test_point {
    std::variant<std::int64_t, torus_point, digit_stream, test_point_list> v;
};

/// Bounded observable on a target system.
class observable {
public:
    /// 1_[lo, hi] with rational endpoints (closed interval).
    static observable indicator(mpq_class lo, mpq_class hi) {
        if (lo > hi) throw std::invalid_argument("indicator: lo <= hi required");
        observable f;
        f.kind_ = kind_t::indicator;
        f.lo_ = std::move(lo);
        f.hi_ = std::move(hi);
        return f;
    }

    /// x -> exp(2 pi i m x) on [0,1).
    static observable character(long m) {
        observable f;
        f.kind_ = kind_t::character;
        f.m_ = m;
        return f;
    }

    /// Finite table of values on Z_k.
    static observable table(std::vector<double> values) {
        if (values.empty()) throw std::invalid_argument("table: need >= 1 value");
        observable f;
        f.kind_ = kind_t::table;
        f.values_ = std::move(values);
        return f;
    }

    /// Lift of an observable through a product coordinate.
    static observable coordinate(std::size_t index, observable inner) {
        observable f;
        f.kind_ = kind_t::coordinate;
        f.index_ = index;
        f.inner_ = std::make_shared<observable>(std::move(inner));
        return f;
    }

    enum class kind_t { indicator, character, table, coordinate };
    kind_t kind() const { return kind_; }
    const mpq_class& lo() const { return lo_; }
    const mpq_class& hi() const { return hi_; }
    long order() const { return m_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t index() const { return index_; }
    const observable& inner() const { return *inner_; }

    double sup_norm() const {
        switch (kind_) {
        case kind_t::indicator: return 1.0;
        case kind_t::character: return 1.0;
        case kind_t::table: {
            double m = 0;
            for (double v : values_) m = std::max(m, std::abs(v));
            return m;
        }
        case kind_t::coordinate: return inner_->sup_norm();
        }
        return 0;
    }

private:
    observable() = default;
    kind_t kind_ = kind_t::character;
    mpq_class lo_, hi_;
    long m_ = 0;
    std::vector<double> values_;
    std::size_t index_ = 0;
    std::shared_ptr<const observable> inner_;
};

/// The target measure-preserving system (X, mu, T) of an averaging
/// experiment, with an exact projection oracle onto invariant functions.
class test_system {
public:
    /// Z_k with T x = x + j mod k; ergodic iff gcd(j, k) = 1.
    static test_system cyclic_rotation(std::int64_t k, std::int64_t j) {
        if (k < 1) throw std::invalid_argument("cyclic rotation: k >= 1 required");
        test_system s(kind_t::cyclic);
        s.k_ = k;
        s.j_ = ((j % k) + k) % k;
        return s;
    }

    static test_system irrational_rotation(cf_stream beta) {
        if (beta.is_finite())
            throw std::invalid_argument("rotation angle must be irrational (infinite cf)");
        test_system s(kind_t::rotation);
        s.beta_ = std::move(beta);
        return s;
    }

    static test_system power_target(std::uint32_t p) {
        if (p < 2) throw std::invalid_argument("power target needs p >= 2");
        test_system s(kind_t::power);
        s.p_ = p;
        return s;
    }

    /// Ergodicity of a product is declared, not inferred.
    static test_system product(std::vector<test_system> factors, bool ergodic) {
        if (factors.size() < 2) throw std::invalid_argument("product: need >= 2 factors");
        test_system s(kind_t::product);
        s.factors_ = std::move(factors);
        s.product_ergodic_ = ergodic;
        return s;
    }

    enum class kind_t { cyclic, rotation, power, product };
    kind_t kind() const { return kind_; }
    std::int64_t modulus() const { return k_; }
    std::int64_t step() const { return j_; }
    std::uint32_t power_base() const { return p_; }
    const std::vector<test_system>& factors() const { return factors_; }

    bool ergodic() const {
        switch (kind_) {
        case kind_t::cyclic: return std::gcd(j_, k_) == 1 || k_ == 1;
        case kind_t::rotation:
        case kind_t::power: return true;
        case kind_t::product: return product_ergodic_;
        }
        return false;
    }

    test_point point_cyclic(std::int64_t x) const {
        if (kind_ != kind_t::cyclic) throw std::invalid_argument("not a cyclic system");
        return {((x % k_) + k_) % k_};
    }

    test_point point_torus(mpq_class x) const {
        if (kind_ != kind_t::rotation) throw std::invalid_argument("not a rotation");
        if (x < 0 || x >= 1) throw std::invalid_argument("torus point must lie in [0,1)");
        return {torus_point{std::move(x), *beta_}};
    }

    test_point point_power(digit_stream x) const {
        if (kind_ != kind_t::power || x.base() != p_)
            throw std::invalid_argument("point base does not match the system");
        return {std::move(x)};
    }

    test_point point_product(test_point_list xs) const {
        if (kind_ != kind_t::product || xs.size() != factors_.size())
            throw std::invalid_argument("product point arity mismatch");
        return {std::move(xs)};
    }

    /// Seeded mu-random point of the right shape.
    test_point random_point(std::uint64_t seed) const {
        switch (kind_) {
        case kind_t::cyclic:
            return {static_cast<std::int64_t>(counter_rng(seed).bounded(0, k_))};
        case kind_t::rotation:
            return {torus_point{uniform_dyadic(counter_rng(seed), 192), *beta_}};
        case kind_t::power:
            return {digit_stream::seeded_random(p_, seed)};
        case kind_t::product: {
            test_point_list xs;
            for (std::size_t i = 0; i < factors_.size(); ++i)
                xs.push_back(factors_[i].random_point(derive_seed(seed, i)));
            return {std::move(xs)};
        }
        }
        throw std::logic_error("bad kind");
    }

private:
    explicit test_system(kind_t k) : kind_(k) {}

    kind_t kind_;
    std::int64_t k_ = 1, j_ = 0;
    std::uint32_t p_ = 2;
    std::optional<cf_stream> beta_;
    std::vector<test_system> factors_;
    bool product_ergodic_ = false;
};

namespace detail {

inline std::complex<double> unit_phase(double frac01, long m) {
    double angle = 2.0 * std::numbers::pi * m * frac01;
    return {std::cos(angle), std::sin(angle)};
}

// closed-interval membership decision for a refinable value in [0,1]
template <typename Refine>
bool in_closed_interval(Refine&& refine, const mpq_class& lo, const mpq_class& hi,
                        const decision_policy& pol) {
    for (int round = 0; round < pol.max_rounds; ++round) {
        rat_interval t = refine(round);
        if (t.lo >= lo && t.hi <= hi) return true;
        if (t.hi < lo || t.lo > hi) return false;
    }
    throw precision_exhausted("indicator membership undecided (value sits on an endpoint?)");
}

} // namespace detail

/// f(T^r x), evaluated exactly for indicators and tables and to double
/// precision for characters.
inline std::complex<double> evaluate_at_time(const test_system& sys, const observable& f,
                                             test_point& x, std::uint64_t r,
                                             const decision_policy& pol = {}) {
    switch (sys.kind()) {
    case test_system::kind_t::cyclic: {
        if (f.kind() != observable::kind_t::table)
            throw std::invalid_argument("cyclic systems take table observables");
        auto xi = std::get<std::int64_t>(x.v);
        std::int64_t k = sys.modulus();
        std::int64_t pos = static_cast<std::int64_t>(
            (static_cast<unsigned __int128>(r % static_cast<std::uint64_t>(k)) *
                 static_cast<std::uint64_t>(sys.step()) +
             static_cast<std::uint64_t>(xi)) %
            static_cast<std::uint64_t>(k));
        if (f.values().size() != static_cast<std::size_t>(k))
            throw std::invalid_argument("table size must equal the modulus");
        return f.values()[static_cast<std::size_t>(pos)];
    }
    case test_system::kind_t::rotation: {
        auto& pt = std::get<torus_point>(x.v);
        if (f.kind() == observable::kind_t::character) {
            auto enc = rotation_orbit_enclosure(pt.x, pt.beta, r, 64);
            return detail::unit_phase(enc.mid_double(), f.order());
        }
        if (f.kind() == observable::kind_t::indicator) {
            bool in = detail::in_closed_interval(
                [&](int round) {
                    return rotation_orbit_enclosure(pt.x, pt.beta, r, pol.threshold_prec << round);
                },
                f.lo(), f.hi(), pol);
            return in ? 1.0 : 0.0;
        }
        throw std::invalid_argument("rotations take character or indicator observables");
    }
    case test_system::kind_t::power: {
        auto& stream = std::get<digit_stream>(x.v);
        if (f.kind() == observable::kind_t::character) {
            if (auto t = stream.exact_tail(r)) return detail::unit_phase(t->get_d(), f.order());
            auto enc = stream.tail_enclosure(r, 64);
            return detail::unit_phase(enc.mid_double(), f.order());
        }
        if (f.kind() == observable::kind_t::indicator) {
            if (auto t = stream.exact_tail(r)) return (*t >= f.lo() && *t <= f.hi()) ? 1.0 : 0.0;
            bool in = detail::in_closed_interval(
                [&](int round) {
                    std::int64_t count = static_cast<std::int64_t>(pol.start_digits) << round;
                    if (count > pol.digit_cap * 2)
                        throw precision_exhausted("digit budget exhausted in observable");
                    return stream.tail_enclosure(
                        r, static_cast<int>(std::min<std::int64_t>(count, pol.digit_cap)));
                },
                f.lo(), f.hi(), pol);
            return in ? 1.0 : 0.0;
        }
        throw std::invalid_argument("power targets take character or indicator observables");
    }
    case test_system::kind_t::product: {
        if (f.kind() != observable::kind_t::coordinate)
            throw std::invalid_argument("product systems take coordinate observables");
        auto& xs = std::get<test_point_list>(x.v);
        if (f.index() >= xs.size()) throw std::invalid_argument("coordinate index out of range");
        return evaluate_at_time(sys.factors()[f.index()], f.inner(), xs[f.index()], r, pol);
    }
    }
    throw std::logic_error("bad kind");
}

/// Exact conditional expectation E(f | invariant sigma-algebra) at x: the
/// integral for ergodic systems, the orbit mean on a non-ergodic cyclic
/// rotation, and the factor projection through a product coordinate.
inline std::complex<double> project_invariant(const test_system& sys, const observable& f,
                                              test_point& x) {
    switch (sys.kind()) {
    case test_system::kind_t::cyclic: {
        if (f.kind() != observable::kind_t::table)
            throw std::invalid_argument("cyclic systems take table observables");
        std::int64_t k = sys.modulus();
        if (f.values().size() != static_cast<std::size_t>(k))
            throw std::invalid_argument("table size must equal the modulus");
        std::int64_t g = std::gcd(sys.step(), k); // gcd(0, k) = k: fixed point
        std::int64_t len = sys.ergodic() ? k : k / g;
        auto xi = std::get<std::int64_t>(x.v);
        kahan_sum s;
        if (sys.ergodic()) {
            for (std::int64_t t = 0; t < k; ++t) s += f.values()[static_cast<std::size_t>(t)];
            return s.value() / static_cast<double>(k);
        }
        std::int64_t pos = xi;
        for (std::int64_t t = 0; t < len; ++t) {
            s += f.values()[static_cast<std::size_t>(pos)];
            pos = (pos + sys.step()) % k;
        }
        return s.value() / static_cast<double>(len);
    }
    case test_system::kind_t::rotation:
    case test_system::kind_t::power: {
        // ergodic: the projection is the integral
        if (f.kind() == observable::kind_t::character) return f.order() == 0 ? 1.0 : 0.0;
        if (f.kind() == observable::kind_t::indicator)
            return mpq_class(f.hi() - f.lo()).get_d();
        throw std::invalid_argument("unsupported observable for this system");
    }
    case test_system::kind_t::product: {
        if (f.kind() != observable::kind_t::coordinate)
            throw std::invalid_argument("product projections need coordinate observables");
        auto& xs = std::get<test_point_list>(x.v);
        if (f.index() >= xs.size()) throw std::invalid_argument("coordinate index out of range");
        return project_invariant(sys.factors()[f.index()], f.inner(), xs[f.index()]);
    }
    }
    throw std::logic_error("bad kind");
}

} // namespace retlab

#endif
