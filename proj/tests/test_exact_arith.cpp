#include <catch2/catch_amalgamated.hpp>

#include "retlab/bigfloat.hpp"
#include "retlab/rational.hpp"
#include "retlab/rng.hpp"
#include "retlab/summation.hpp"
#include "retlab/threshold.hpp"

using namespace retlab;

TEST_CASE("counter rng is addressable and replay-deterministic") {
    counter_rng a(42), b(42), c(43);
    for (std::uint64_t i = 0; i < 1000; ++i) {
        REQUIRE(a.word(i) == b.word(i));
    }
    // out-of-order access equals in-order access
    REQUIRE(a.word(999) == b.word(999));
    REQUIRE(a.word(0) == b.word(0));
    bool differs = false;
    for (std::uint64_t i = 0; i < 64 && !differs; ++i) differs = a.word(i) != c.word(i);
    REQUIRE(differs);
}

TEST_CASE("bounded draw stays in range and looks uniform-ish") {
    counter_rng r(7);
    int counts[10] = {0};
    for (std::uint64_t i = 0; i < 100000; ++i) {
        auto d = r.bounded(i, 10);
        REQUIRE(d < 10);
        ++counts[d];
    }
    for (int k = 0; k < 10; ++k) {
        REQUIRE(counts[k] > 9000);
        REQUIRE(counts[k] < 11000);
    }
}

TEST_CASE("rational parsing is exact") {
    REQUIRE(parse_rational("3/4") == make_q(3, 4));
    REQUIRE(parse_rational("0.4") == make_q(2, 5));
    REQUIRE(parse_rational("0.25") == make_q(1, 4));
    REQUIRE(parse_rational("-1.5e-3") == make_q(-3, 2000));
    REQUIRE(parse_rational("7") == 7);
    REQUIRE_THROWS(parse_rational("abc"));
}

TEST_CASE("compensated summation beats float noise") {
    kahan_sum s;
    for (int i = 0; i < 1000000; ++i) s += 0.1;
    REQUIRE(std::abs(s.value() - 100000.0) < 1e-7);
}

TEST_CASE("to_mpq round-trips dyadic values exactly") {
    big_float x(64);
    mpfr_set_d(x.get(), 0.625, MPFR_RNDN);
    REQUIRE(to_mpq(x.get()) == make_q(5, 8));
}

TEST_CASE("threshold: c*n^-a at n=1 encloses c exactly") {
    auto t = threshold::power_law(mpq_class(1), parse_rational("0.3"));
    auto enc = t.eval(1, 64);
    REQUIRE(enc.contains(mpq_class(1)));
    REQUIRE(enc.width() <= pow2_q(-64));
}

TEST_CASE("threshold: 16^-1/2 encloses 1/4") {
    auto t = threshold::power_law(mpq_class(1), make_q(1, 2));
    auto enc = t.eval(16, 80);
    REQUIRE(enc.contains(make_q(1, 4)));
    REQUIRE(enc.width() <= pow2_q(-80));
}

TEST_CASE("threshold: 32^-0.4 encloses 1/4") {
    // oracle: 32^0.4 = 2^(5 * 2/5) = 4, checked independently in big floats
    big_float base(128), e(128), r(128);
    mpfr_set_ui(base.get(), 32, MPFR_RNDN);
    mpfr_set_q(e.get(), parse_rational("0.4").get_mpq_t(), MPFR_RNDN);
    mpfr_pow(r.get(), base.get(), e.get(), MPFR_RNDN);
    REQUIRE(std::abs(mpfr_get_d(r.get(), MPFR_RNDN) - 4.0) < 1e-30);

    auto t = threshold::power_law(mpq_class(1), parse_rational("0.4"));
    auto enc = t.eval(32, 100);
    REQUIRE(enc.contains(make_q(1, 4)));
    REQUIRE(enc.width() <= pow2_q(-100));
}

TEST_CASE("threshold enclosures nest as precision grows") {
    auto t = threshold::power_law(parse_rational("0.7"), parse_rational("0.41"));
    auto g = threshold::gauss_pow(parse_rational("1.7"), parse_rational("0.23"));
    for (std::uint64_t n : {2ull, 17ull, 1000ull, 123456ull}) {
        auto c1 = t.eval(n, 32), c2 = t.eval(n, 96);
        REQUIRE(c1.contains(c2));
        auto d1 = g.eval(n, 32), d2 = g.eval(n, 96);
        REQUIRE(d1.contains(d2));
    }
}

TEST_CASE("threshold equality detection") {
    auto t = threshold::power_law(mpq_class(1), parse_rational("0.4"));
    REQUIRE(t.equals_exactly(make_q(1, 4), 32));       // 32^-0.4 == 1/4
    REQUIRE_FALSE(t.equals_exactly(make_q(1, 4), 31)); // 31^-0.4 is irrational
    REQUIRE_FALSE(t.equals_exactly(make_q(1, 3), 32));

    auto g = threshold::gauss_pow(mpq_class(2), parse_rational("0.4"));
    // 2^(32^-0.4) - 1 = 2^(1/4) - 1, irrational
    REQUIRE_FALSE(g.equals_exactly(make_q(1, 5), 32));
    // 4^(32^-0.4) - 1 = 4^(1/4) - 1 = sqrt(2) - 1, still irrational
    auto g4 = threshold::gauss_pow(mpq_class(4), parse_rational("0.4"));
    REQUIRE_FALSE(g4.equals_exactly(make_q(2, 5), 32));
    // 16^(32^-0.4) - 1 = 16^(1/4) - 1 = 1
    auto g16 = threshold::gauss_pow(mpq_class(16), parse_rational("0.4"));
    REQUIRE(g16.equals_exactly(mpq_class(1), 32));
}

TEST_CASE("threshold parameter validation") {
    REQUIRE_THROWS(threshold::power_law(mpq_class(0), parse_rational("0.4")));
    REQUIRE_THROWS(threshold::power_law(mpq_class(1), mpq_class(1)));
    REQUIRE_THROWS(threshold::gauss_pow(mpq_class(1), parse_rational("0.4")));
}

TEST_CASE("complemented threshold evaluates 1 - value") {
    auto t = threshold::power_law(mpq_class(1), make_q(1, 2)).complemented();
    auto enc = t.eval(16, 64);
    REQUIRE(enc.contains(make_q(3, 4)));
}

TEST_CASE("uniform dyadic sampling is deterministic and in range") {
    counter_rng r(5);
    auto x = uniform_dyadic(r, 256);
    auto y = uniform_dyadic(counter_rng(5), 256);
    REQUIRE(x == y);
    REQUIRE(x >= 0);
    REQUIRE(x < 1);
}
