#pragma once

#include <stdexcept>
#include <string>

namespace phoclone {

// Error kinds double as the machine-readable "kind" field of CLI error JSON.
enum class ErrorKind {
    invalid_argument,
    unknown_label,
    layout_mismatch,
    degenerate_elimination,
    singular_detuning,
    integration_failure,
    instability,
    not_found,
    degenerate_null_space,
    config,
    io,
    cancelled
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace phoclone
