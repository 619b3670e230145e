#pragma once

#include <stdexcept>
#include <string>

namespace snls {

// Configuration faults map to exit code 2, numerical faults to exit code 3.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

enum class FaultKind {
    Domain,
    Dealiasing,
    Truncation,
    Tolerance,
    Accuracy,
    BlowUp,
    StuckChain,
    DegenerateState,
    InsufficientSignal,
    Quadrature,
    Io,
};

const char* fault_name(FaultKind k);

class NumericalError : public std::runtime_error {
public:
    NumericalError(FaultKind kind, const std::string& what)
        : std::runtime_error(std::string(fault_name(kind)) + ": " + what), kind_(kind) {}
    FaultKind kind() const { return kind_; }

private:
    FaultKind kind_;
};

inline const char* fault_name(FaultKind k) {
    switch (k) {
    case FaultKind::Domain: return "domain";
    case FaultKind::Dealiasing: return "dealiasing";
    case FaultKind::Truncation: return "truncation";
    case FaultKind::Tolerance: return "tolerance";
    case FaultKind::Accuracy: return "accuracy";
    case FaultKind::BlowUp: return "blow-up";
    case FaultKind::StuckChain: return "stuck-chain";
    case FaultKind::DegenerateState: return "degenerate-state";
    case FaultKind::InsufficientSignal: return "insufficient-signal";
    case FaultKind::Quadrature: return "quadrature";
    case FaultKind::Io: return "io";
    }
    return "unknown";
}

} // namespace snls
