#include "phoclone/errors.hpp"

namespace phoclone {

const char* to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::unknown_label: return "unknown_label";
    case ErrorKind::layout_mismatch: return "layout_mismatch";
    case ErrorKind::degenerate_elimination: return "degenerate_elimination";
    case ErrorKind::singular_detuning: return "singular_detuning";
    case ErrorKind::integration_failure: return "integration_failure";
    case ErrorKind::instability: return "instability";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::degenerate_null_space: return "degenerate_null_space";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
    case ErrorKind::cancelled: return "cancelled";
    }
    return "unknown";
}

} // namespace phoclone
