#ifndef RETLAB_THRESHOLD_HPP
#define RETLAB_THRESHOLD_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "retlab/bigfloat.hpp"
#include "retlab/rational.hpp"

namespace retlab {

enum class threshold_kind {
    constant,  // fixed rational
    power_law, // c * n^(-a)
    gauss_pow, // b^(n^(-a)) - 1
};

/// Endpoint expression of a target interval, parameterized by the scan index
/// n. Evaluation returns a rational enclosure whose width shrinks on demand;
/// nested precision requests produce nested enclosures. An optional
/// complement flag represents 1 - expr (used for sets wrapping around 1).
class threshold {
public:
    static threshold constant(mpq_class v) {
        threshold t;
        t.kind_ = threshold_kind::constant;
        t.value_ = std::move(v);
        return t;
    }

    static threshold power_law(mpq_class c, mpq_class a) {
        if (c <= 0) throw std::invalid_argument("power_law: c > 0 required");
        if (a < 0 || a >= 1) throw std::invalid_argument("power_law: a in [0, 1) required");
        threshold t;
        t.kind_ = threshold_kind::power_law;
        t.c_ = std::move(c);
        t.a_ = std::move(a);
        return t;
    }

    /// n^(-a) / 2, the shrinking-ball radius; a power law with c = 1/2.
    static threshold half_power(mpq_class a) { return power_law(make_q(1, 2), std::move(a)); }

    static threshold gauss_pow(mpq_class b, mpq_class a) {
        if (b <= 1) throw std::invalid_argument("gauss_pow: b > 1 required");
        if (a < 0 || a >= 1) throw std::invalid_argument("gauss_pow: a in [0, 1) required");
        threshold t;
        t.kind_ = threshold_kind::gauss_pow;
        t.b_ = std::move(b);
        t.a_ = std::move(a);
        return t;
    }

    threshold complemented() const {
        threshold t = *this;
        t.complement_ = !t.complement_;
        return t;
    }

    threshold_kind kind() const { return kind_; }
    bool is_complement() const { return complement_; }
    const mpq_class& a() const { return a_; }
    const mpq_class& c() const { return c_; }
    const mpq_class& b() const { return b_; }

    /// Exact value when the expression is rational-valued at this n
    /// (constants always; power laws when n^a is rational).
    std::optional<mpq_class> exact_value(std::uint64_t n) const {
        std::optional<mpq_class> base;
        switch (kind_) {
        case threshold_kind::constant:
            base = value_;
            break;
        case threshold_kind::power_law: {
            if (a_ == 0) {
                base = c_;
                break;
            }
            auto r = rational_power(n);
            if (r) base = c_ * *r;
            break;
        }
        case threshold_kind::gauss_pow: {
            if (a_ == 0) {
                base = b_ - 1;
                break;
            }
            break; // b^(n^-a) rational only in contrived cases; not needed
        }
        }
        if (!base) return std::nullopt;
        return complement_ ? mpq_class(1 - *base) : *base;
    }

    /// Enclosure of the value with width <= 2^(-precision_bits).
    rat_interval eval(std::uint64_t n, int precision_bits) const {
        if (n == 0) throw std::invalid_argument("threshold: n >= 1 required");
        if (auto v = exact_value(n)) return {*v, *v};
        mpq_class tol = pow2_q(-precision_bits);
        mpfr_prec_t work = precision_bits + 32;
        for (int round = 0; round < 24; ++round, work *= 2) {
            rat_interval r = eval_at(n, work);
            if (r.width() <= tol) return complement_ ? rat_interval{1 - r.hi, 1 - r.lo} : r;
        }
        throw std::logic_error("threshold: enclosure failed to converge");
    }

    /// Decide t == value exactly (endpoint-hit detection for open-interval
    /// membership). Conservative: may return false for equal values whose
    /// equality is not decidable by the rational tests below; such cases
    /// surface later as a precision-exhaustion error, never a wrong answer.
    bool equals_exactly(const mpq_class& t_in, std::uint64_t n) const {
        mpq_class t = complement_ ? mpq_class(1 - t_in) : t_in;
        switch (kind_) {
        case threshold_kind::constant:
            return t == value_;
        case threshold_kind::power_law: {
            if (a_ == 0) return t == c_;
            if (t <= 0) return false;
            unsigned long p = exponent_num(), q = exponent_den();
            if (q > 64) return false;
            double bits = static_cast<double>(p) * std::log2(static_cast<double>(n) + 1.0);
            if (bits > 1e6) return false;
            // t == c * n^(-p/q)  <=>  t^q * n^p == c^q
            mpz_class np;
            mpz_ui_pow_ui(np.get_mpz_t(), static_cast<unsigned long>(n), p);
            return pow_q(t, q) * mpq_class(np) == pow_q(c_, q);
        }
        case threshold_kind::gauss_pow: {
            if (a_ == 0) return t == b_ - 1;
            if (t <= 0) return false;
            unsigned long p = exponent_num(), q = exponent_den();
            if (q > 64) return false;
            mpz_class np;
            double bits = static_cast<double>(p) * std::log2(static_cast<double>(n) + 1.0);
            if (bits > 1e6) return false;
            mpz_ui_pow_ui(np.get_mpz_t(), static_cast<unsigned long>(n), p);
            mpz_class w;
            // n^(-a) is rational iff n^p is a perfect q-th power, say w^q;
            // then value-1+... reduces to b == (1+t)^w. Otherwise b^(n^-a)
            // is transcendental (Gelfond-Schneider), hence never rational.
            if (mpz_root(w.get_mpz_t(), np.get_mpz_t(), q) == 0) return false;
            if (!w.fits_ulong_p() || w.get_ui() > 4096) return false;
            return pow_q(mpq_class(1 + t), w.get_ui()) == b_;
        }
        }
        return false;
    }

    std::string describe() const {
        std::string s;
        switch (kind_) {
        case threshold_kind::constant: s = value_.get_str(); break;
        case threshold_kind::power_law: s = c_.get_str() + "*n^(-" + a_.get_str() + ")"; break;
        case threshold_kind::gauss_pow: s = b_.get_str() + "^(n^(-" + a_.get_str() + "))-1"; break;
        }
        return complement_ ? "1-(" + s + ")" : s;
    }

private:
    threshold() = default;

    unsigned long exponent_num() const { return mpz_get_ui(a_.get_num().get_mpz_t()); }
    unsigned long exponent_den() const { return mpz_get_ui(a_.get_den().get_mpz_t()); }

    // n^(-a) as an exact rational when possible
    std::optional<mpq_class> rational_power(std::uint64_t n) const {
        if (n == 1) return mpq_class(1);
        unsigned long p = exponent_num(), q = exponent_den();
        if (q > 64) return std::nullopt;
        double bits = static_cast<double>(p) * std::log2(static_cast<double>(n) + 1.0);
        if (bits > 1e6) return std::nullopt;
        mpz_class np, w;
        mpz_ui_pow_ui(np.get_mpz_t(), static_cast<unsigned long>(n), p);
        if (mpz_root(w.get_mpz_t(), np.get_mpz_t(), q) == 0) return std::nullopt;
        mpq_class r(1);
        r /= mpq_class(w);
        r.canonicalize();
        return r;
    }

    rat_interval eval_at(std::uint64_t n, mpfr_prec_t work) const {
        switch (kind_) {
        case threshold_kind::constant:
            return {value_, value_};
        case threshold_kind::power_law: {
            rat_interval p = enclose_uipow(n, mpq_class(-a_), work);
            return {c_ * p.lo, c_ * p.hi}; // exact rational scaling
        }
        case threshold_kind::gauss_pow: {
            rat_interval e = enclose_uipow(n, mpq_class(-a_), work);
            // b > 1, so b^t is increasing in t
            mpq_class lo = enclose_pow(b_, e.lo, work).lo - 1;
            mpq_class hi = enclose_pow(b_, e.hi, work).hi - 1;
            return {std::move(lo), std::move(hi)};
        }
        }
        throw std::logic_error("threshold: bad kind");
    }

    threshold_kind kind_ = threshold_kind::constant;
    bool complement_ = false;
    mpq_class value_;
    mpq_class a_, c_, b_;
};

} // namespace retlab

#endif
