#pragma once

#include <atomic>
#include <cstdint>

#include "specpos/errors.hpp"

namespace specpos {

// Global size caps. Carriers (relation spans, element lists, limit family
// sets) are materialized fully, so a cap keeps brute-force work at desk
// scale. The CLI exposes --max-carrier; tests may raise it.

inline std::atomic<std::int64_t>& max_carrier_ref() {
    static std::atomic<std::int64_t> cap{4096};
    return cap;
}

inline std::int64_t max_carrier() { return max_carrier_ref().load(); }

inline void set_max_carrier(std::int64_t n) {
    if (n <= 0) throw input_error("max-carrier must be positive");
    max_carrier_ref().store(n);
}

/// Enumeration budget for scan loops (hom matrices, kernels).
inline constexpr std::int64_t max_scan = 20'000'000;

inline void check_carrier(std::int64_t n, const char* what) {
    if (n > max_carrier())
        throw unsupported_error(std::string(what) + " exceeds carrier cap (" +
                                std::to_string(n) + " > " + std::to_string(max_carrier()) + ")");
}

} // namespace specpos
