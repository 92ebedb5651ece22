#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <vector>

#include "retlab/rational.hpp"
#include "retlab/return_sequence.hpp"

using namespace retlab;

namespace {

std::vector<std::uint32_t> thue_morse(std::size_t len) {
    std::vector<std::uint32_t> d(len);
    for (std::size_t i = 0; i < len; ++i) d[i] = __builtin_popcountll(i) & 1;
    return d;
}

} // namespace

TEST_CASE("constant full-space target returns every natural") {
    auto sys = source_system::power_map(2);
    auto fam = target_family::constant_set({{mpq_class(0), mpq_class(1)}});
    auto seq = return_sequence::return_times(sys, fam, 17);
    for (std::uint64_t i = 1; i <= 20; ++i) REQUIRE(seq.next() == i);
    auto [terms, count] = seq.up_to(5);
    REQUIRE(count == 5);
    REQUIRE(terms == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
}

TEST_CASE("thue-morse fixture: first seven returns into (0, 1/2)") {
    auto sys = source_system::power_map(2);
    auto fam = target_family::constant_set({{mpq_class(0), make_q(1, 2)}});
    auto seq = return_sequence::return_times_at(sys, fam,
                                                digit_stream::fixed_list(2, thue_morse(64)));
    std::vector<std::uint64_t> expect{3, 5, 6, 9, 10, 12, 15};
    for (auto e : expect) REQUIRE(seq.next() == e);

    auto seq2 = return_sequence::return_times_at(sys, fam,
                                                 digit_stream::fixed_list(2, thue_morse(64)));
    auto [terms, count] = seq2.up_to(15);
    REQUIRE(count == 7);
    REQUIRE(terms == expect);
}

TEST_CASE("bernoulli with certain hits returns every natural") {
    auto seq = return_sequence::bernoulli(mpq_class(0), mpq_class(1), 5);
    for (std::uint64_t i = 1; i <= 100; ++i) REQUIRE(seq.next() == i);
}

TEST_CASE("bernoulli counts concentrate around the expected count") {
    auto sys = source_system::power_map(2);
    auto fam = target_family::shrinking_interval(mpq_class(1), parse_rational("0.4"));
    double w = fam.cumulative(10000, sys);
    auto seq = return_sequence::bernoulli(parse_rational("0.4"), mpq_class(1), 7);
    auto count = seq.hits_up_to(10000);
    REQUIRE(std::abs(static_cast<double>(count) - w) <= 4 * std::sqrt(w));
}

TEST_CASE("hits_up_to is idempotent and monotone") {
    auto seq = return_sequence::bernoulli(parse_rational("0.3"), make_q(1, 2), 3);
    auto c1 = seq.hits_up_to(2000);
    auto c2 = seq.hits_up_to(2000);
    auto c_lo = seq.hits_up_to(500);
    REQUIRE(c1 == c2);
    REQUIRE(c_lo <= c1);
    auto again = return_sequence::bernoulli(parse_rational("0.3"), make_q(1, 2), 3);
    REQUIRE(again.hits_up_to(500) == c_lo);
}

TEST_CASE("deterministic formulas") {
    auto sq = return_sequence::deterministic(det_formula::squares);
    REQUIRE(sq.term(1) == 1);
    REQUIRE(sq.term(7) == 49);
    auto id = return_sequence::deterministic(det_formula::identity);
    REQUIRE(id.term(3) == 3);
    auto pl = return_sequence::deterministic(det_formula::power_law, parse_rational("0.4"));
    // exact check of floor(n^(5/3)): r^3 <= n^5 < (r+1)^3
    for (std::uint64_t n : {1ull, 2ull, 10ull, 1000ull, 98765ull}) {
        mpz_class n5, r3, r1_3;
        mpz_ui_pow_ui(n5.get_mpz_t(), n, 5);
        std::uint64_t r = pl.term(n);
        mpz_ui_pow_ui(r3.get_mpz_t(), r, 3);
        mpz_ui_pow_ui(r1_3.get_mpz_t(), r + 1, 3);
        REQUIRE(r3 <= n5);
        REQUIRE(n5 < r1_3);
    }
}

TEST_CASE("growth exponents of comparison sequences") {
    auto sq = return_sequence::deterministic(det_formula::squares);
    REQUIRE(std::abs(sq.growth_exponent(100, 2000) - 2.0) < 0.01);
    auto id = return_sequence::deterministic(det_formula::identity);
    REQUIRE(std::abs(id.growth_exponent(100, 2000) - 1.0) < 0.001);
    auto pl = return_sequence::deterministic(det_formula::power_law, parse_rational("0.4"));
    REQUIRE(std::abs(pl.growth_exponent(100, 2000) - 5.0 / 3.0) < 0.01);
}

TEST_CASE("growth exponent of power-map returns approaches 1/(1-a)") {
    auto sys = source_system::power_map(2);
    auto fam = target_family::shrinking_interval(mpq_class(1), parse_rational("0.4"));
    auto seq = return_sequence::return_times(sys, fam, 11);
    auto count = seq.hits_up_to(100000);
    REQUIRE(count > 500);
    double slope = seq.growth_exponent(100, count);
    REQUIRE(slope > 1.5);
    REQUIRE(slope < 1.84);
}

TEST_CASE("growth exponent input validation") {
    auto id = return_sequence::deterministic(det_formula::identity);
    REQUIRE_THROWS(id.growth_exponent(100, 150)); // n_max < 2 n_min
    auto sys = source_system::power_map(2);
    auto fam = target_family::constant_set({{mpq_class(0), make_q(1, 2)}});
    scan_options opt;
    opt.horizon = 50; // at most ~25 hits fit below the horizon
    auto seq = return_sequence::return_times(sys, fam, 1, opt);
    REQUIRE_THROWS_AS(seq.growth_exponent(100, 1000), std::invalid_argument);
}

TEST_CASE("scan equivalence with the naive oracle") {
    auto sys = source_system::power_map(2);
    auto fam = target_family::shrinking_interval(mpq_class(1), parse_rational("0.4"));
    const std::uint64_t seed = 4242, N = 10000;
    auto seq = return_sequence::return_times(sys, fam, seed);
    auto [terms, count] = seq.up_to(N);

    // naive scan: fresh point, fresh membership decision per index, no
    // fast-path shortcuts
    auto y = sys.sample_point(seed);
    std::vector<std::uint64_t> naive;
    for (std::uint64_t n = 1; n <= N; ++n)
        if (sys.orbit_membership(y, n, fam.target_set(n))) naive.push_back(n);
    REQUIRE(terms == naive);
    REQUIRE(count == naive.size());
}

TEST_CASE("terms are strictly increasing with no duplicates") {
    auto seq = return_sequence::bernoulli(parse_rational("0.25"), mpq_class(1), 77);
    auto [terms, count] = seq.up_to(50000);
    for (std::size_t i = 1; i < terms.size(); ++i) REQUIRE(terms[i] > terms[i - 1]);
}

TEST_CASE("scan-limit exhaustion is loud and keeps partial data") {
    auto sys = source_system::power_map(2);
    auto fam = target_family::constant_set({{mpq_class(0), pow2_q(-40)}});
    scan_options opt;
    opt.horizon = 2000;
    auto seq = return_sequence::return_times(sys, fam, 9, opt);
    REQUIRE_THROWS_AS(seq.next(), scan_limit_reached);
    REQUIRE(seq.scanned() == 2000);
    REQUIRE(seq.emitted() == 0);
}

TEST_CASE("same seed, same terms; different seed, different terms") {
    auto sys = source_system::power_map(2);
    auto fam = target_family::shrinking_interval(mpq_class(1), parse_rational("0.4"));
    auto a = return_sequence::return_times(sys, fam, 5);
    auto b = return_sequence::return_times(sys, fam, 5);
    auto c = return_sequence::return_times(sys, fam, 6);
    REQUIRE(a.up_to(5000) == b.up_to(5000));
    REQUIRE(a.up_to(5000) != c.up_to(5000));
}
