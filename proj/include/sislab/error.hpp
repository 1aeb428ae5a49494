#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sislab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inputs that don't fit together (mismatched grids, wrong field sizes).
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Arguments outside the domain where an operation is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Expression or scenario text that failed to parse. `position` is a
/// zero-based character offset (or npos when unknown).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what), position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Initial data or parameters violating one or more admissibility clauses.
class AdmissibilityError : public Error {
public:
    explicit AdmissibilityError(std::vector<std::string> clauses)
        : Error(join(clauses)), clauses_(std::move(clauses)) {}
    const std::vector<std::string>& clauses() const noexcept { return clauses_; }

private:
    static std::string join(const std::vector<std::string>& c) {
        std::string out = "admissibility violation:";
        for (const auto& s : c) out += " [" + s + "]";
        return out;
    }
    std::vector<std::string> clauses_;
};

/// An iterative method hit its iteration cap.
class NonConvergenceError : public Error {
public:
    using Error::Error;
};

/// Upper and lower monotone iterations failed to meet.
class NonUniquenessError : public Error {
public:
    using Error::Error;
};

/// A query needed an input that was not supplied.
class MissingInputError : public Error {
public:
    using Error::Error;
};

/// Internal invariant breach (e.g. the positivity floor was bypassed).
class InternalError : public Error {
public:
    using Error::Error;
};

}  // namespace sislab
