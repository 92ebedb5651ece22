#ifndef RETLAB_IO_HPP
#define RETLAB_IO_HPP

#include <json.hpp>

#include <complex>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "retlab/version.hpp"

namespace retlab {

using ordered_json = nlohmann::ordered_json;

/// FNV-1a 64-bit, used to stamp outputs with a config fingerprint.
inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Locale-independent shortest-roundtrip double formatting.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// CSV emitter with a one-line provenance header:
///   # retlab <version> config=<hash> seed=<seed>
/// Rows are comma-separated with '.' decimals; output is byte-stable for
/// equal configs and seeds modulo the version field.
class csv_writer {
public:
    csv_writer(const std::string& path, std::uint64_t config_hash, std::uint64_t seed,
               const std::string& columns)
        : out_(path) {
        if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
        out_ << "# retlab " << version_string << " config=" << hex64(config_hash)
             << " seed=" << seed << "\n";
        out_ << columns << "\n";
    }

    void row(std::initializer_list<std::string> cells) {
        bool first = true;
        for (const auto& c : cells) {
            if (!first) out_ << ',';
            out_ << c;
            first = false;
        }
        out_ << '\n';
    }

    static std::string cell(std::uint64_t v) { return std::to_string(v); }
    static std::string cell(double v) { return format_double(v); }

private:
    std::ofstream out_;
};

inline ordered_json provenance(std::uint64_t config_hash) {
    ordered_json j;
    j["tool"] = "retlab";
    j["version"] = version_string;
    j["config_hash"] = hex64(config_hash);
    return j;
}

inline void write_json(const std::string& path, const ordered_json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

} // namespace retlab

#endif
