#ifndef RETLAB_CONFIG_HPP
#define RETLAB_CONFIG_HPP

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "retlab/errors.hpp"
#include "retlab/io.hpp"
#include "retlab/markov.hpp"
#include "retlab/rational.hpp"
#include "retlab/return_sequence.hpp"
#include "retlab/source_system.hpp"
#include "retlab/target_family.hpp"
#include "retlab/test_system.hpp"
#include "retlab/verification.hpp"

namespace retlab {

/// Flat key=value configuration: UTF-8 lines, '#' comments, comma lists.
/// Unknown keys are rejected so typos fail loudly.
class experiment_config {
public:
    static experiment_config from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw config_error("cannot read config file: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return from_string(ss.str());
    }

    static experiment_config from_string(const std::string& text) {
        experiment_config cfg;
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            auto trim = [](std::string s) {
                auto b = s.find_first_not_of(" \t\r");
                auto e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
            };
            line = trim(line);
            if (line.empty()) continue;
            auto eq = line.find('=');
            if (eq == std::string::npos) throw config_error("bad config line: " + line);
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw config_error("bad config line: " + line);
            if (cfg.kv_.count(key)) throw config_error("duplicate config key: " + key);
            cfg.kv_[key] = value;
        }
        cfg.validate_keys();
        return cfg;
    }

    /// FNV over the canonical sorted key=value form.
    std::uint64_t hash() const {
        std::string canon;
        for (const auto& [k, v] : kv_) {
            canon += k;
            canon += '=';
            canon += v;
            canon += '\n';
        }
        return fnv1a64(canon);
    }

    bool has(const std::string& key) const { return kv_.count(key) > 0; }

    std::string get(const std::string& key, const std::string& fallback) const {
        auto it = kv_.find(key);
        return it == kv_.end() ? fallback : it->second;
    }

    std::string require(const std::string& key) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) throw config_error("missing config key: " + key);
        return it->second;
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        try {
            return std::stoull(it->second);
        } catch (const std::exception&) {
            throw config_error("key " + key + " wants an integer, got: " + it->second);
        }
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        try {
            return std::stod(it->second);
        } catch (const std::exception&) {
            throw config_error("key " + key + " wants a number, got: " + it->second);
        }
    }

    mpq_class get_q(const std::string& key, const std::string& fallback) const {
        std::string v = get(key, fallback);
        try {
            return parse_rational(v);
        } catch (const std::exception&) {
            throw config_error("key " + key + " wants a rational, got: " + v);
        }
    }

    std::vector<std::uint64_t> seeds(std::optional<std::uint64_t> override_seed) const {
        if (override_seed) return {*override_seed};
        if (has("seeds")) {
            std::vector<std::uint64_t> out;
            for (const auto& tok : split(require("seeds"), ','))
                out.push_back(std::stoull(tok));
            if (out.empty()) throw config_error("seeds list is empty");
            return out;
        }
        std::uint64_t count = get_u64("seed_count", 1);
        std::uint64_t base = get_u64("seed_base", 1);
        std::vector<std::uint64_t> out;
        for (std::uint64_t i = 0; i < count; ++i) out.push_back(base + i);
        return out;
    }

    // --- object builders -------------------------------------------------

    source_system make_source() const {
        std::string kind = get("source", "power");
        if (kind == "power") return source_system::power_map(
            static_cast<std::uint32_t>(get_u64("power_p", 2)));
        if (kind == "gauss") return source_system::gauss_map();
        if (kind == "rotation") return source_system::rotation_map(make_cf(get("alpha_cf", "golden")));
        if (kind == "markov") {
            auto chain = make_chain();
            std::uint64_t mask = event_mask(chain.states());
            std::optional<std::uint32_t> start;
            std::string s = get("chain_start", "stationary");
            if (s != "stationary") start = static_cast<std::uint32_t>(std::stoul(s));
            return source_system::markov_shift(std::move(chain), mask, start);
        }
        throw config_error("unknown source: " + kind);
    }

    target_family make_family() const {
        std::string kind = get("target", "shrinking");
        if (kind == "shrinking")
            return target_family::shrinking_interval(get_q("c", "1"), get_q("a", "0.4"));
        if (kind == "gauss_shrinking")
            return target_family::gauss_shrinking(get_q("b", "2"), get_q("a", "0.4"));
        if (kind == "ball") return target_family::centered_ball(get_q("a", "0.4"));
        if (kind == "constant") {
            std::vector<std::pair<mpq_class, mpq_class>> ivs;
            for (const auto& part : split(get("constant_intervals", "0,1"), ';')) {
                auto ends = split(part, ',');
                if (ends.size() != 2) throw config_error("constant_intervals wants lo,hi pairs");
                ivs.emplace_back(parse_rational(ends[0]), parse_rational(ends[1]));
            }
            return target_family::constant_set(std::move(ivs));
        }
        throw config_error("unknown target: " + kind);
    }

    test_system make_target_system() const {
        std::string kind = get("test_system", "rotation");
        if (kind == "cyclic")
            return test_system::cyclic_rotation(static_cast<std::int64_t>(get_u64("cyclic_k", 6)),
                                                static_cast<std::int64_t>(get_u64("cyclic_j", 2)));
        if (kind == "rotation") return test_system::irrational_rotation(make_cf(get("beta_cf", "golden")));
        if (kind == "power") return test_system::power_target(
            static_cast<std::uint32_t>(get_u64("test_power_p", 2)));
        throw config_error("unknown test_system: " + kind + " (products are library-level)");
    }

    observable make_observable() const {
        std::string kind = get("observable", "character");
        if (kind == "character") return observable::character(
            static_cast<long>(get_u64("character_m", 1)));
        if (kind == "indicator")
            return observable::indicator(get_q("indicator_lo", "0"), get_q("indicator_hi", "0.25"));
        if (kind == "table") {
            if (has("table_values")) {
                std::vector<double> vals;
                for (const auto& tok : split(require("table_values"), ','))
                    vals.push_back(std::stod(tok));
                return observable::table(std::move(vals));
            }
            std::uint64_t k = get_u64("cyclic_k", 6);
            counter_rng rng(get_u64("table_random_seed", 1));
            std::vector<double> vals(k);
            for (std::uint64_t i = 0; i < k; ++i) vals[i] = rng.uniform01(i);
            return observable::table(std::move(vals));
        }
        throw config_error("unknown observable: " + kind);
    }

    markov_chain make_chain() const {
        std::string rows = get("chain_rows", "3/4,1/4;1/4,3/4");
        markov_chain::matrix m;
        for (const auto& row : split(rows, ';')) {
            std::vector<mpq_class> r;
            for (const auto& tok : split(row, ',')) r.push_back(parse_rational(tok));
            m.push_back(std::move(r));
        }
        try {
            return markov_chain::create(std::move(m));
        } catch (const std::invalid_argument& e) {
            throw config_error(std::string("bad chain: ") + e.what());
        }
    }

    std::uint64_t event_mask(std::size_t states) const {
        std::uint64_t mask = 0;
        for (const auto& tok : split(get("chain_event", "1"), ',')) {
            std::uint64_t s = std::stoull(tok);
            if (s >= states) throw config_error("chain_event state out of range");
            mask |= std::uint64_t{1} << s;
        }
        return mask;
    }

    scan_options make_scan_options() const {
        scan_options opt;
        opt.horizon = get_u64("scan_horizon", 100000000);
        opt.policy.digit_cap = static_cast<int>(get_u64("digit_cap", 4096));
        opt.policy.quotient_cap = static_cast<int>(get_u64("quotient_cap", 512));
        opt.sampling.rotation_bits = static_cast<int>(get_u64("rotation_bits", 256));
        opt.sampling.cf_bits = static_cast<int>(get_u64("cf_bits", 4096));
        return opt;
    }

    /// x for averaging experiments: a rational literal, or "seeded" for a
    /// mu-random point derived from the experiment seed.
    std::optional<mpq_class> fixed_x() const {
        std::string v = get("x", "0");
        if (v == "seeded") return std::nullopt;
        return parse_rational(v);
    }

    double gamma() const {
        double g = get_double("gamma", 1.1);
        if (!(g > 1.0 && g <= 2.0)) throw config_error("gamma must lie in (1, 2]");
        return g;
    }

    static std::vector<std::string> split(const std::string& s, char sep) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : s) {
            if (c == sep) {
                if (!cur.empty()) out.push_back(cur);
                cur.clear();
            } else if (!isspace(static_cast<unsigned char>(c))) {
                cur += c;
            }
        }
        if (!cur.empty()) out.push_back(cur);
        return out;
    }

    cf_stream make_cf(const std::string& spec) const {
        if (spec == "golden") return cf_stream::periodic({1});
        if (spec == "sqrt2") return cf_stream::periodic({2});
        if (spec.rfind("periodic:", 0) == 0) {
            std::vector<std::uint64_t> qs;
            for (const auto& tok : split(spec.substr(9), ',')) qs.push_back(std::stoull(tok));
            return cf_stream::periodic(std::move(qs));
        }
        if (spec.rfind("uniform:", 0) == 0)
            return cf_stream::from_uniform(std::stoull(spec.substr(8)),
                                           static_cast<int>(get_u64("cf_bits", 4096)));
        throw config_error("unknown continued fraction spec: " + spec);
    }

private:
    void validate_keys() const {
        static const std::vector<std::string> known{
            "source", "power_p", "alpha_cf", "chain_rows", "chain_event", "chain_start",
            "target", "a", "c", "b", "constant_intervals",
            "test_system", "cyclic_k", "cyclic_j", "beta_cf", "test_power_p",
            "observable", "character_m", "indicator_lo", "indicator_hi", "table_values",
            "table_random_seed", "x", "x_offset",
            "seeds", "seed_count", "seed_base",
            "n_max", "k_max", "gamma", "epsilon", "residue_m",
            "scan_horizon", "digit_cap", "quotient_cap", "rotation_bits", "cf_bits",
            "verify_n_max", "verify_k_max", "rate", "rate_c", "rate_lambda",
            "verify_spaces", "verify_vdc_instances", "vn_x_samples", "vn_n_max",
            "returns_wanted",
        };
        for (const auto& [k, v] : kv_) {
            if (std::find(known.begin(), known.end(), k) == known.end())
                throw config_error("unknown config key: " + k);
        }
    }

    std::map<std::string, std::string> kv_;
};

} // namespace retlab

#endif
