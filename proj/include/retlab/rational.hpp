#ifndef RETLAB_RATIONAL_HPP
#define RETLAB_RATIONAL_HPP

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace retlab {

inline mpq_class make_q(long num, long den) {
    mpq_class q(num, den);
    q.canonicalize();
    return q;
}

/// Parse "3/4", "0.25", "-1.5e-3" or "7" into an exact rational.
/// Decimal strings are exact (no binary float round-trip).
inline mpq_class parse_rational(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty rational literal");
    if (text.find('/') != std::string::npos) {
        mpq_class q;
        if (q.set_str(text, 10) != 0) throw std::invalid_argument("bad rational: " + text);
        q.canonicalize();
        return q;
    }
    std::string s = text;
    long exp10 = 0;
    auto epos = s.find_first_of("eE");
    if (epos != std::string::npos) {
        exp10 = std::stol(s.substr(epos + 1));
        s = s.substr(0, epos);
    }
    auto dot = s.find('.');
    if (dot != std::string::npos) {
        exp10 -= static_cast<long>(s.size() - dot - 1);
        s.erase(dot, 1);
    }
    if (s.empty() || s == "-" || s == "+") throw std::invalid_argument("bad rational: " + text);
    mpz_class mant;
    if (mant.set_str(s, 10) != 0) throw std::invalid_argument("bad rational: " + text);
    mpq_class q(mant);
    mpz_class p10;
    mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(exp10 < 0 ? -exp10 : exp10));
    if (exp10 >= 0)
        q *= mpq_class(p10);
    else
        q /= mpq_class(p10);
    q.canonicalize();
    return q;
}

inline mpq_class pow2_q(long e) {
    mpq_class q(1);
    if (e >= 0)
        mpz_mul_2exp(q.get_num_mpz_t(), q.get_num_mpz_t(), static_cast<unsigned long>(e));
    else
        mpz_mul_2exp(q.get_den_mpz_t(), q.get_den_mpz_t(), static_cast<unsigned long>(-e));
    return q;
}

/// Uniform dyadic rational in [0, 1) with the given number of random bits.
template <typename Rng>
mpq_class uniform_dyadic(const Rng& rng, int bits, std::uint64_t word_offset = 0) {
    mpz_class num(0);
    int words = (bits + 63) / 64;
    for (int w = 0; w < words; ++w) {
        mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), 64);
        num += mpz_class(static_cast<unsigned long>(rng.word(word_offset + w)));
    }
    int extra = words * 64 - bits;
    if (extra > 0) mpz_fdiv_q_2exp(num.get_mpz_t(), num.get_mpz_t(), extra);
    mpq_class q(num);
    q /= pow2_q(bits);
    q.canonicalize();
    return q;
}

/// q^e for integer e (e may be negative; q must be nonzero then).
inline mpq_class pow_q(const mpq_class& q, unsigned long e) {
    mpq_class r;
    mpz_pow_ui(r.get_num_mpz_t(), q.get_num().get_mpz_t(), e);
    mpz_pow_ui(r.get_den_mpz_t(), q.get_den().get_mpz_t(), e);
    r.canonicalize();
    return r;
}

inline mpq_class frac_q(const mpq_class& q) {
    mpz_class fl;
    mpz_fdiv_q(fl.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
    return q - mpq_class(fl);
}

} // namespace retlab

#endif
