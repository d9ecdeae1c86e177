#pragma once

#include <stdexcept>
#include <string>

namespace ohs {

// Error taxonomy shared by the library and the CLI. `kind` is a stable
// machine-readable tag (the CLI emits it as `error_kind=<kind>` on stderr);
// `user_error` separates bad input (exit 2) from internal numerical
// failures (exit 3).
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what, bool user_error)
        : std::runtime_error(what), kind_(std::move(kind)), user_(user_error) {}

    const std::string& kind() const noexcept { return kind_; }
    bool user_error() const noexcept { return user_; }

private:
    std::string kind_;
    bool user_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("domain", what, true) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("io", what, true) {}
};

class InsufficientDataError : public Error {
public:
    explicit InsufficientDataError(const std::string& what)
        : Error("insufficient-data", what, true) {}
};

// Raised when Theorem-1-style preconditions fail and no interior optimum
// exists. `diagnosis` states which boundary dominates.
class NoInteriorOhsError : public Error {
public:
    enum class Diagnosis {
        k1_dominates,  // k1 >= k2 everywhere: holding out adds no value
        k2_dominates,  // k2 >= k1 everywhere on (0,N]: score never pays off
    };

    NoInteriorOhsError(Diagnosis d, const std::string& what)
        : Error("no-interior-ohs", what, true), diagnosis_(d) {}

    Diagnosis diagnosis() const noexcept { return diagnosis_; }

private:
    Diagnosis diagnosis_;
};

class FitFailureError : public Error {
public:
    explicit FitFailureError(const std::string& what) : Error("fit-failure", what, false) {}
};

class ConditioningError : public Error {
public:
    explicit ConditioningError(const std::string& what)
        : Error("conditioning", what, false) {}
};

class CiUndefinedError : public Error {
public:
    explicit CiUndefinedError(const std::string& what)
        : Error("ci-undefined", what, true) {}
};

class CovarianceInvalidError : public Error {
public:
    explicit CovarianceInvalidError(const std::string& what)
        : Error("covariance-invalid", what, false) {}
};

class UnsupportedError : public Error {
public:
    explicit UnsupportedError(const std::string& what)
        : Error("unsupported", what, true) {}
};

class CalibrationError : public Error {
public:
    explicit CalibrationError(const std::string& what)
        : Error("calibration", what, false) {}
};

class AlgorithmFailureError : public Error {
public:
    explicit AlgorithmFailureError(const std::string& what)
        : Error("algorithm-failure", what, false) {}
};

}  // namespace ohs
