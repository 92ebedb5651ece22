#ifndef RETLAB_MARKOV_HPP
#define RETLAB_MARKOV_HPP

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "retlab/errors.hpp"
#include "retlab/rng.hpp"

namespace retlab {

/// Finite aperiodic-or-not Markov chain in exact rational arithmetic.
/// Used as a ground-truth probability oracle; no floating point enters any
/// probability computed here.
class markov_chain {
public:
    using matrix = std::vector<std::vector<mpq_class>>;

    /// `lambda2` is the declared second-eigenvalue modulus; for 2-state
    /// chains it is computed exactly as |1 - p01 - p10| when not given.
    static markov_chain create(matrix transitions, std::optional<std::vector<mpq_class>> stationary =
                                                       std::nullopt,
                               std::optional<double> lambda2 = std::nullopt) {
        markov_chain c;
        c.p_ = std::move(transitions);
        std::size_t k = c.p_.size();
        if (k < 2) throw std::invalid_argument("chain needs >= 2 states");
        for (const auto& row : c.p_) {
            if (row.size() != k) throw std::invalid_argument("transition matrix not square");
            mpq_class s(0);
            for (const auto& e : row) {
                if (e < 0 || e > 1) throw std::invalid_argument("transition entry outside [0,1]");
                s += e;
            }
            if (s != 1) throw std::invalid_argument("transition row does not sum to 1");
        }
        c.pi_ = stationary ? *stationary : solve_stationary(c.p_);
        if (c.pi_.size() != k) throw std::invalid_argument("stationary vector size mismatch");
        mpq_class total(0);
        for (const auto& e : c.pi_) {
            if (e < 0) throw std::invalid_argument("stationary entry negative");
            total += e;
        }
        if (total != 1) throw std::invalid_argument("stationary vector does not sum to 1");
        for (std::size_t j = 0; j < k; ++j) {
            mpq_class s(0);
            for (std::size_t i = 0; i < k; ++i) s += c.pi_[i] * c.p_[i][j];
            if (s != c.pi_[j]) throw std::invalid_argument("vector is not stationary (pi P != pi)");
        }
        if (lambda2)
            c.lambda2_ = *lambda2;
        else if (k == 2) {
            mpq_class l = 1 - c.p_[0][1] - c.p_[1][0];
            c.lambda2_ = std::abs(l.get_d());
            c.lambda2_exact_ = abs(l);
        }
        return c;
    }

    static markov_chain two_state(const mpq_class& stay0, const mpq_class& stay1) {
        return create({{stay0, 1 - stay0}, {1 - stay1, stay1}});
    }

    std::size_t states() const { return p_.size(); }
    const matrix& transitions() const { return p_; }
    const std::vector<mpq_class>& stationary() const { return pi_; }
    double second_eigenvalue_modulus() const { return lambda2_; }

    /// Exact |lambda_2| when available (2-state chains).
    std::optional<mpq_class> lambda2_exact() const { return lambda2_exact_; }

    mpq_class stationary_mass(std::uint64_t event_mask) const {
        mpq_class s(0);
        for (std::size_t i = 0; i < pi_.size(); ++i)
            if (event_mask >> i & 1) s += pi_[i];
        return s;
    }

    /// One transfer step: v <- v P.
    void step(std::vector<mpq_class>& v) const {
        std::size_t k = states();
        std::vector<mpq_class> next(k, mpq_class(0));
        for (std::size_t i = 0; i < k; ++i) {
            if (v[i] == 0) continue;
            for (std::size_t j = 0; j < k; ++j)
                if (p_[i][j] != 0) next[j] += v[i] * p_[i][j];
        }
        v = std::move(next);
    }

private:
    // Gaussian elimination over Q for pi P = pi, sum pi = 1.
    static std::vector<mpq_class> solve_stationary(const matrix& p) {
        std::size_t k = p.size();
        // unknowns pi_0..pi_{k-1}; equations (P^T - I) pi = 0 (first k-1) + sum = 1
        std::vector<std::vector<mpq_class>> m(k, std::vector<mpq_class>(k + 1, mpq_class(0)));
        for (std::size_t r = 0; r + 1 < k; ++r) {
            for (std::size_t c = 0; c < k; ++c) m[r][c] = p[c][r] - mpq_class(c == r ? 1 : 0);
            m[r][k] = 0;
        }
        for (std::size_t c = 0; c < k; ++c) m[k - 1][c] = 1;
        m[k - 1][k] = 1;
        for (std::size_t col = 0, row = 0; col < k && row < k; ++col) {
            std::size_t piv = row;
            while (piv < k && m[piv][col] == 0) ++piv;
            if (piv == k) continue;
            std::swap(m[piv], m[row]);
            mpq_class inv = 1 / m[row][col];
            for (std::size_t c = col; c <= k; ++c) m[row][c] *= inv;
            for (std::size_t r = 0; r < k; ++r) {
                if (r == row || m[r][col] == 0) continue;
                mpq_class f = m[r][col];
                for (std::size_t c = col; c <= k; ++c) m[r][c] -= f * m[row][c];
            }
            ++row;
        }
        std::vector<mpq_class> pi(k);
        for (std::size_t i = 0; i < k; ++i) pi[i] = m[i][k];
        return pi;
    }

    matrix p_;
    std::vector<mpq_class> pi_;
    double lambda2_ = 0.0;
    std::optional<mpq_class> lambda2_exact_;
};

/// Exact P(state_{n_1} in E, ..., state_{n_k} in E) for the stationary
/// chain, by transfer-matrix products with restriction after each gap.
inline mpq_class joint_event_probability(const markov_chain& chain,
                                         const std::vector<std::uint64_t>& times,
                                         std::uint64_t event_mask) {
    if (times.empty()) throw std::invalid_argument("need at least one time");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (times[i] <= times[i - 1]) throw std::invalid_argument("times must be increasing");
    if (times.front() < 1) throw std::invalid_argument("times must be >= 1");
    std::size_t k = chain.states();
    auto restrict_to = [&](std::vector<mpq_class>& v) {
        for (std::size_t i = 0; i < k; ++i)
            if (!(event_mask >> i & 1)) v[i] = 0;
    };
    // stationary marginal at time n_1
    std::vector<mpq_class> v = chain.stationary();
    restrict_to(v);
    for (std::size_t t = 1; t < times.size(); ++t) {
        std::uint64_t gap = times[t] - times[t - 1];
        for (std::uint64_t g = 0; g < gap; ++g) chain.step(v);
        restrict_to(v);
    }
    mpq_class total(0);
    for (const auto& e : v) total += e;
    return total;
}

/// Lazily sampled stationary path of a chain; exact-in-distribution
/// transitions via lazily extended random bits, one address block per step.
class markov_path {
public:
    markov_path(markov_chain chain, std::uint64_t seed,
                std::optional<std::uint32_t> start = std::nullopt)
        : chain_(std::move(chain)), rng_(seed), start_(start) {}

    /// State at time n >= 0 (time 0 is the initial state).
    std::uint32_t state(std::uint64_t n) {
        while (states_.size() <= n) extend();
        return states_[n];
    }

    const markov_chain& chain() const { return chain_; }

private:
    void extend() {
        if (states_.empty()) {
            if (start_)
                states_.push_back(*start_);
            else
                states_.push_back(sample_row(chain_.stationary(), 0));
            return;
        }
        std::uint64_t step_index = states_.size();
        states_.push_back(sample_row(chain_.transitions()[states_.back()], step_index));
    }

    // Inverse-CDF sampling with an exact rational comparison. The uniform
    // variate is refined 64 bits at a time until its dyadic window lies in
    // one category; eight words (512 bits) never fail in practice.
    std::uint32_t sample_row(const std::vector<mpq_class>& probs, std::uint64_t step_index) {
        mpz_class num(0);
        mpz_class den(1);
        for (int w = 0; w < 8; ++w) {
            std::uint64_t word = rng_.word(step_index * 8 + w);
            mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), 64);
            mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), 64);
            num += mpz_class(static_cast<unsigned long>(word));
            mpq_class lo(num, den), hi(num + 1, den);
            lo.canonicalize();
            hi.canonicalize();
            mpq_class cum(0);
            for (std::size_t s = 0; s < probs.size(); ++s) {
                mpq_class next = cum + probs[s];
                if (lo >= cum && hi <= next) return static_cast<std::uint32_t>(s);
                cum = next;
            }
        }
        throw precision_exhausted("markov sampler: 512 bits did not decide a category");
    }

    markov_chain chain_;
    counter_rng rng_;
    std::optional<std::uint32_t> start_;
    std::vector<std::uint32_t> states_;
};

} // namespace retlab

#endif
