#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <vector>

#include "retlab/rational.hpp"
#include "retlab/source_system.hpp"
#include "retlab/target_family.hpp"

using namespace retlab;

namespace {

std::vector<std::uint32_t> thue_morse(std::size_t len) {
    std::vector<std::uint32_t> d(len);
    for (std::size_t i = 0; i < len; ++i) d[i] = __builtin_popcountll(i) & 1;
    return d;
}

interval_set const_iv(const mpq_class& lo, const mpq_class& hi) {
    return {{threshold::constant(lo), threshold::constant(hi), 1}};
}

} // namespace

TEST_CASE("power-map orbit membership via digit tails") {
    auto sys = source_system::power_map(2);
    source_point y = digit_stream::fixed_list(2, thue_morse(64));
    REQUIRE(sys.orbit_membership(y, 3, const_iv(mpq_class(0), make_q(1, 2))));
    REQUIRE_FALSE(sys.orbit_membership(y, 2, const_iv(mpq_class(0), make_q(1, 2))));
}

TEST_CASE("rotation membership in the full interval is trivially true") {
    auto sys = source_system::rotation_map(cf_stream::periodic({1}));
    auto y = sys.sample_point(3);
    REQUIRE(sys.orbit_membership(y, 12345, const_iv(mpq_class(0), mpq_class(1))));
}

TEST_CASE("markov shift reads the sampled state against the symbol event") {
    auto chain = markov_chain::create({{mpq_class(0), mpq_class(1)}, {mpq_class(1), mpq_class(0)}});
    auto sys = source_system::markov_shift(chain, 0b10, 0); // event {1}, start at 0
    auto y = sys.sample_point(4);
    interval_set ignored = const_iv(mpq_class(0), mpq_class(1));
    REQUIRE(sys.orbit_membership(y, 1, ignored));
    REQUIRE_FALSE(sys.orbit_membership(y, 2, ignored));
}

TEST_CASE("lebesgue measure of rational sets is exact") {
    auto sys = source_system::power_map(2);
    REQUIRE(*sys.measure_exact(const_iv(mpq_class(0), make_q(1, 4))) == make_q(1, 4));
    REQUIRE(sys.measure(const_iv(mpq_class(0), make_q(1, 4))) == 0.25);
}

TEST_CASE("gauss measure: full space and closed-form shrinking targets") {
    auto sys = source_system::gauss_map();
    auto full = sys.measure_enclosure(const_iv(mpq_class(0), mpq_class(1)), 80);
    REQUIRE(full.contains(mpq_class(1)));
    REQUIRE(full.width() <= pow2_q(-78));

    // E = (0, 2^(n^-a) - 1) has Gauss measure n^-a: at n=32, a=0.4 that is
    // exactly 1/4
    auto fam = target_family::gauss_shrinking(mpq_class(2), parse_rational("0.4"));
    auto enc = sys.measure_enclosure(fam.target_set(32), 96);
    REQUIRE(enc.contains(make_q(1, 4)));
    REQUIRE(enc.width() <= pow2_q(-90));
}

TEST_CASE("overlapping components are rejected") {
    interval_set s;
    s.push_back({threshold::constant(mpq_class(0)), threshold::constant(make_q(1, 2)), 1});
    s.push_back({threshold::constant(make_q(1, 4)), threshold::constant(make_q(3, 4)), 1});
    auto sys = source_system::power_map(2);
    REQUIRE_THROWS(sys.measure(s));
    // touching open intervals are fine
    interval_set t;
    t.push_back({threshold::constant(mpq_class(0)), threshold::constant(make_q(1, 2)), 1});
    t.push_back({threshold::constant(make_q(1, 2)), threshold::constant(mpq_class(1)), 1});
    REQUIRE(sys.measure(t) == 1.0);
}

TEST_CASE("monte carlo frequency matches the invariant measure: power map") {
    auto sys = source_system::power_map(2);
    auto set = const_iv(make_q(1, 4), make_q(3, 4));
    const int trials = 10000;
    int hits = 0;
    for (int s = 0; s < trials; ++s) {
        auto y = sys.sample_point(900000 + s);
        if (sys.orbit_membership(y, 5, set)) ++hits;
    }
    double freq = static_cast<double>(hits) / trials;
    double se = std::sqrt(0.5 * 0.5 / trials);
    REQUIRE(std::abs(freq - 0.5) < 4 * se);
}

TEST_CASE("monte carlo frequency matches the invariant measure: gauss map") {
    auto sys = source_system::gauss_map();
    auto set = const_iv(mpq_class(0), make_q(1, 2));
    const int trials = 2000;
    int hits = 0;
    for (int s = 0; s < trials; ++s) {
        auto y = sys.sample_point(770000 + s);
        if (sys.orbit_membership(y, 3, set)) ++hits;
    }
    double freq = static_cast<double>(hits) / trials;
    double expected = std::log2(1.5); // Gauss measure of (0, 1/2)
    double se = std::sqrt(expected * (1 - expected) / trials);
    REQUIRE(std::abs(freq - expected) < 4 * se);
}

TEST_CASE("rotation is an isometry at every enclosure precision") {
    cf_stream alpha = cf_stream::periodic({1});
    mpq_class y = parse_rational("0.3217");
    mpq_class x = frac_q(y + parse_rational("0.6"));
    mpq_class diff = frac_q(x - y);
    for (int prec : {32, 64, 128, 256}) {
        for (std::uint64_t n : {1ull, 17ull, 1000ull}) {
            cf_stream ax = alpha, ay = alpha;
            auto ex = rotation_orbit_enclosure(x, ax, n, prec);
            auto ey = rotation_orbit_enclosure(y, ay, n, prec);
            // (x + n a) - (y + n a) = x - y holds for every enclosure pair:
            // the interval of differences must contain x - y mod 1
            mpq_class d_lo = ex.lo - ey.hi, d_hi = ex.hi - ey.lo;
            bool contains = (d_lo <= diff && diff <= d_hi) || (d_lo <= diff - 1 && diff - 1 <= d_hi);
            REQUIRE(contains);
        }
    }
}

TEST_CASE("badly approximable flag for periodic angles") {
    auto golden = source_system::rotation_map(cf_stream::periodic({1}));
    REQUIRE(golden.badly_approximable(1));
    auto mixed = source_system::rotation_map(cf_stream::periodic({1, 7, 2}));
    REQUIRE(mixed.badly_approximable(7));
    REQUIRE_FALSE(mixed.badly_approximable(6));
}

TEST_CASE("rotation angle must be irrational") {
    REQUIRE_THROWS(source_system::rotation_map(cf_stream::fixed_list({2, 2})));
}
