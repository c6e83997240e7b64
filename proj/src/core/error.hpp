#pragma once

#include <stdexcept>
#include <string>

namespace cespdc {

// Error categories surface unchanged through the C API as status codes, so
// keep this list in sync with cespdc_status in include/cespdc/cespdc.h.
enum class ErrorKind {
    domain,          // argument outside a function's mathematical domain
    precondition,    // caller broke a documented precondition (ordering, sortedness)
    no_solution,     // root search or fit found nothing to converge to
    underdetermined, // not enough data for the requested estimate
    non_finite,      // NaN/Inf produced during evaluation
    config,          // configuration validation failure
    io,              // file read/write failure
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

struct PreconditionError : Error {
    explicit PreconditionError(const std::string& what) : Error(ErrorKind::precondition, what) {}
};

struct NoSolutionError : Error {
    explicit NoSolutionError(const std::string& what) : Error(ErrorKind::no_solution, what) {}
};

struct UnderdeterminedError : Error {
    explicit UnderdeterminedError(const std::string& what) : Error(ErrorKind::underdetermined, what) {}
};

struct NonFiniteError : Error {
    explicit NonFiniteError(const std::string& what) : Error(ErrorKind::non_finite, what) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

}  // namespace cespdc
