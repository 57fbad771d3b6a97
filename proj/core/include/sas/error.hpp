#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sas {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text; carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A value violates a documented invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A named feature, manifold or column does not exist.
class NotFoundError : public Error {
public:
    using Error::Error;
};

/// Spectrum analysis found no sub-Doppler structure where some was required.
class NoFeaturesError : public Error {
public:
    using Error::Error;
};

/// Least-squares fit failed to converge within its iteration cap.
class FitError : public Error {
public:
    using Error::Error;
};

/// No usable zero crossing on the requested feature.
class UnlockableError : public Error {
public:
    using Error::Error;
};

/// Laser left its mode-hop-free tuning envelope.
class ModeHopFault : public Error {
public:
    ModeHopFault(const std::string& what, double detuning_hz)
        : Error(what), detuning_hz_(detuning_hz) {}
    double detuning_hz() const noexcept { return detuning_hz_; }

private:
    double detuning_hz_;
};

/// Scenario configuration problem (unknown key, bad value, inconsistent section).
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace sas
