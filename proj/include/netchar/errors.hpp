#pragma once

#include <stdexcept>
#include <string>

namespace netchar {

// Error categories map one-to-one onto CLI exit codes (see tools/netchar.cpp).

// Bad arguments, dimension mismatches, malformed or schema-invalid inputs.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerically degenerate or nonphysical situations: rank deficiency,
// vanishing reference couplings, transmissivities beyond tolerance.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem failures: unreadable, missing, or unwritable files.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace netchar
