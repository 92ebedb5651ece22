#ifndef RETLAB_ERRORS_HPP
#define RETLAB_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace retlab {

/// Thrown when a membership or comparison cannot be decided within the
/// configured precision budget (digit cap, quotient cap, bit cap).
/// Signals either a boundary hit (measure zero for random inputs) or an
/// undersized cap, never a silent wrong answer.
class precision_exhausted : public std::runtime_error {
public:
    explicit precision_exhausted(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a return-time scan finds no further hit within the scan
/// horizon. The scan position reached is attached so partial results can
/// be reported as data.
class scan_limit_reached : public std::runtime_error {
public:
    scan_limit_reached(const std::string& what, std::uint64_t scanned)
        : std::runtime_error(what), scanned_(scanned) {}
    std::uint64_t scanned() const { return scanned_; }

private:
    std::uint64_t scanned_;
};

/// Invalid experiment configuration (bad key, out-of-range parameter, ...).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// An exact-enumeration request exceeds the stated budget (tuple counts,
/// state counts, horizons).
class budget_exceeded : public std::runtime_error {
public:
    explicit budget_exceeded(const std::string& what) : std::runtime_error(what) {}
};

} // namespace retlab

#endif
