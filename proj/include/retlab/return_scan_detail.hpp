#ifndef RETLAB_RETURN_SCAN_DETAIL_HPP
#define RETLAB_RETURN_SCAN_DETAIL_HPP

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>

namespace retlab::detail {

/// floor(i^(p/q)) in exact integer arithmetic.
inline std::uint64_t floor_rational_power(std::uint64_t i, const mpq_class& exponent) {
    unsigned long p = mpz_get_ui(exponent.get_num().get_mpz_t());
    unsigned long q = mpz_get_ui(exponent.get_den().get_mpz_t());
    if (q == 0) throw std::invalid_argument("bad exponent");
    mpz_class ip;
    mpz_ui_pow_ui(ip.get_mpz_t(), static_cast<unsigned long>(i), p);
    mpz_class r;
    mpz_root(r.get_mpz_t(), ip.get_mpz_t(), q);
    if (!r.fits_ulong_p()) throw std::overflow_error("formula term exceeds 64 bits");
    return r.get_ui();
}

} // namespace retlab::detail

#endif
