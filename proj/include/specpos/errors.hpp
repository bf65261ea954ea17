#pragma once

#include <stdexcept>
#include <string>

namespace specpos {

// Exit-code taxonomy shared by the library and the CLI:
//   0  success
//   1  a property check rejected its input (verdict, not an exception)
//   2  malformed input or a request outside the supported size/backends
//   3  an internal invariant failed (a theorem-level contradiction)

/// Malformed input: bad file syntax, violated constructor preconditions.
class input_error : public std::runtime_error {
public:
    explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Structurally valid request that exceeds a size cap or asks an
/// operation of the wrong backend.
class unsupported_error : public std::runtime_error {
public:
    explicit unsupported_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A verified mathematical invariant failed. Carries a counterexample dump.
class invariant_violation : public std::runtime_error {
public:
    explicit invariant_violation(const std::string& msg) : std::runtime_error(msg) {}
};

inline constexpr int exit_ok = 0;
inline constexpr int exit_rejected = 1;
inline constexpr int exit_input_error = 2;
inline constexpr int exit_invariant_violation = 3;

} // namespace specpos
