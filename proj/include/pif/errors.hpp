#pragma once

#include <stdexcept>
#include <string>

namespace pif {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Violated precondition on an input value (bad index, mismatched lengths, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Scenario file problems. The message carries `file:line:` when known.
class ConfigError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

enum class ProtocolFailure {
    EmptySignal,
    NoDecay,               // probe signal never settles: localized cavity states
    InitialCavityOccupied,
    TruncationEnergy,      // injection energy outside the window above bound
    DeconvolutionBlowup,
    WindowOutOfRange,
};

const char* to_string(ProtocolFailure failure);

/// A run that is well-formed but whose physics violates a protocol premise.
class ProtocolError : public Error {
public:
    ProtocolError(ProtocolFailure failure, const std::string& what)
        : Error(std::string(to_string(failure)) + ": " + what), failure_(failure) {}

    ProtocolFailure failure() const noexcept { return failure_; }

private:
    ProtocolFailure failure_;
};

inline const char* to_string(ProtocolFailure failure) {
    switch (failure) {
    case ProtocolFailure::EmptySignal: return "empty signal";
    case ProtocolFailure::NoDecay: return "no decay (localized cavity states?)";
    case ProtocolFailure::InitialCavityOccupied: return "initial cavity occupancy";
    case ProtocolFailure::TruncationEnergy: return "out-of-window injection energy";
    case ProtocolFailure::DeconvolutionBlowup: return "deconvolution blow-up";
    case ProtocolFailure::WindowOutOfRange: return "window out of range";
    }
    return "protocol failure";
}

} // namespace pif
