#ifndef RETLAB_AVERAGING_HPP
#define RETLAB_AVERAGING_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "retlab/return_sequence.hpp"
#include "retlab/summation.hpp"
#include "retlab/test_system.hpp"

namespace retlab {

/// Averages A_K = (1/K) sum_{n<=K} f(T^{r_n} x) recorded at a lacunary grid
/// of K values plus the final K. K counts sequence terms, not scan depth.
struct average_trace {
    std::vector<std::uint64_t> checkpoints;
    std::vector<std::complex<double>> values;
    std::complex<double> projection;
    double sup_f = 0;
    std::uint64_t terms_used = 0;
    bool truncated = false; // scan horizon cut the sequence short

    std::complex<double> final_value() const {
        if (values.empty()) throw std::logic_error("empty trace");
        return values.back();
    }
    double final_gap() const { return std::abs(final_value() - projection); }
};

/// Checkpoint grid floor(gamma^i) up to k_max, deduplicated, with k_max
/// appended as the endpoint.
inline std::vector<std::uint64_t> lacunary_grid(std::uint64_t k_max, double gamma) {
    if (!(gamma > 1.0 && gamma <= 2.0)) throw std::invalid_argument("gamma must lie in (1, 2]");
    if (k_max < 1) throw std::invalid_argument("k_max >= 1 required");
    std::vector<std::uint64_t> grid;
    double g = gamma;
    for (;;) {
        auto v = static_cast<std::uint64_t>(std::floor(g));
        if (v >= k_max) break;
        if (v >= 1 && (grid.empty() || v > grid.back())) grid.push_back(v);
        g *= gamma;
        if (g > 1e18) break;
    }
    grid.push_back(k_max);
    return grid;
}

inline average_trace average_along(return_sequence& seq, const test_system& sys,
                                   const observable& f, test_point x, std::uint64_t k_max,
                                   double gamma = 1.1, const decision_policy& pol = {}) {
    average_trace tr;
    tr.checkpoints = lacunary_grid(k_max, gamma);
    tr.sup_f = f.sup_norm();
    tr.projection = project_invariant(sys, f, x);
    kahan_csum acc;
    std::vector<std::uint64_t> recorded_k;
    std::size_t next_cp = 0;
    std::uint64_t k = 0;
    while (k < k_max) {
        std::uint64_t r;
        try {
            r = seq.term(k + 1);
        } catch (const scan_limit_reached&) {
            tr.truncated = true;
            break;
        }
        ++k;
        acc += evaluate_at_time(sys, f, x, r, pol);
        while (next_cp < tr.checkpoints.size() && tr.checkpoints[next_cp] == k) {
            recorded_k.push_back(k);
            tr.values.push_back(acc.value() / static_cast<double>(k));
            ++next_cp;
        }
    }
    tr.terms_used = k;
    if (recorded_k.empty() || recorded_k.back() != k) {
        recorded_k.push_back(k);
        tr.values.push_back(k ? acc.value() / static_cast<double>(k) : std::complex<double>{0, 0});
    }
    tr.checkpoints = std::move(recorded_k);
    return tr;
}

/// Empirical distribution of r_n mod m over the first K terms.
inline std::vector<double> residue_distribution(return_sequence& seq, std::uint64_t m,
                                                std::uint64_t K) {
    if (m < 1 || K < 1) throw std::invalid_argument("residue_distribution: m, K >= 1");
    std::vector<std::uint64_t> counts(m, 0);
    for (std::uint64_t i = 1; i <= K; ++i) ++counts[seq.term(i) % m];
    std::vector<double> freq(m);
    for (std::uint64_t r = 0; r < m; ++r)
        freq[r] = static_cast<double>(counts[r]) / static_cast<double>(K);
    return freq;
}

} // namespace retlab

#endif
