#pragma once

#include <stdexcept>
#include <string>

namespace cantor {

enum class ErrorKind {
    ParseError,
    PreconditionViolated,
    NotPartitioned,
    ValidityLost,
    Exhausted,
    Infeasible,
    StateCorrupt,
    OrbitUndefined,
    BadThresholds,
    TraceMismatch,
    Unsupported,
};

// Single exception type; `kind` carries the domain-level failure class so
// callers and tests can dispatch without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string msg)
        : std::runtime_error(std::move(msg)), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
    throw Error(kind, msg);
}

inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::PreconditionViolated: return "PreconditionViolated";
        case ErrorKind::NotPartitioned: return "NotPartitioned";
        case ErrorKind::ValidityLost: return "ValidityLost";
        case ErrorKind::Exhausted: return "Exhausted";
        case ErrorKind::Infeasible: return "Infeasible";
        case ErrorKind::StateCorrupt: return "StateCorrupt";
        case ErrorKind::OrbitUndefined: return "OrbitUndefined";
        case ErrorKind::BadThresholds: return "BadThresholds";
        case ErrorKind::TraceMismatch: return "TraceMismatch";
        case ErrorKind::Unsupported: return "Unsupported";
    }
    return "Error";
}

}  // namespace cantor
