#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wdde {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

// Bilinear parameters without a strictly stationary solution (lambda >= 1).
class StationarityError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

// A theorem's hypotheses do not hold for the supplied parameters.
class HypothesisError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

// Covariance tuple enumeration would exceed the brute-force budget.
class EnumerationError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Config parse failure; carries the 1-based line number (0 when not tied to a line).
class ParseError : public std::runtime_error
{
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what)
        , line_(line)
    {
    }

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace wdde
