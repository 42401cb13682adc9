#pragma once

#include <stdexcept>
#include <string>

namespace xtq {

/// Input violated a documented precondition (bad flag, malformed record, ...).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A formula was evaluated outside its domain (e.g. a norm >= 1).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed input record; carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// The chain has a state whose transition row sums to one.
class InfeasibleModel : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace xtq
