#pragma once

#include <stdexcept>
#include <string>

namespace abel {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Row outer-product sum is rank deficient; the EL dual has no unique solution.
class DegenerateSecondMoment : public Error {
public:
    explicit DegenerateSecondMoment(const std::string& what) : Error(what) {}
};

// Dual solver hit the iteration cap with residual above tolerance.
// Usually signals hull-boundary or otherwise degenerate geometry.
class NonConvergence : public Error {
public:
    explicit NonConvergence(const std::string& what) : Error(what) {}
};

class InvalidBlockSpec : public Error {
public:
    explicit InvalidBlockSpec(const std::string& what) : Error(what) {}
};

class ShapeMismatch : public Error {
public:
    explicit ShapeMismatch(const std::string& what) : Error(what) {}
};

class InvalidTuning : public Error {
public:
    explicit InvalidTuning(const std::string& what) : Error(what) {}
};

class UnsupportedGrouping : public Error {
public:
    explicit UnsupportedGrouping(const std::string& what) : Error(what) {}
};

class MissingMoments : public Error {
public:
    explicit MissingMoments(const std::string& what) : Error(what) {}
};

class BootstrapDegenerate : public Error {
public:
    explicit BootstrapDegenerate(const std::string& what) : Error(what) {}
};

class BracketFailure : public Error {
public:
    explicit BracketFailure(const std::string& what) : Error(what) {}
};

class OptimFailure : public Error {
public:
    explicit OptimFailure(const std::string& what) : Error(what) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

class ParseError : public Error {
public:
    ParseError(std::size_t row, std::size_t col, const std::string& what)
        : Error(what), row(row), col(col) {}
    std::size_t row; // 1-based
    std::size_t col; // 1-based
};

} // namespace abel
