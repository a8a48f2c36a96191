#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace distdiag
{

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (unknown action,
/// undeclared fault, malformed input model).
class InputDomainError : public Error
{
public:
    using Error::Error;
};

/// Factor alphabets cannot be composed.
class CompositionError : public Error
{
public:
    using Error::Error;
};

/// Syntax or semantic error in a text document, with a 1-based position.
class ParseError : public Error
{
public:
    ParseError( std::size_t line, std::size_t column, const std::string& message )
            : Error( "line " + std::to_string( line ) + ", column " + std::to_string( column ) + ": " + message ),
              _line{ line }, _column{ column }
    {
    }

    [[nodiscard]] std::size_t line() const noexcept { return _line; }
    [[nodiscard]] std::size_t column() const noexcept { return _column; }

private:
    std::size_t _line;
    std::size_t _column;
};

/// Thrown out of an exploration when its stop token was triggered.
class Cancelled : public Error
{
public:
    Cancelled() : Error( "exploration cancelled" ) {}
};

/// Thrown out of an exploration that reached its configured state budget.
class BudgetExceeded : public Error
{
public:
    explicit BudgetExceeded( std::size_t budget )
            : Error( "state budget of " + std::to_string( budget ) + " exceeded" ), _budget{ budget }
    {
    }

    [[nodiscard]] std::size_t budget() const noexcept { return _budget; }

private:
    std::size_t _budget;
};

/// The two analysis methods returned contradicting definite verdicts.
class SoundnessViolation : public Error
{
public:
    using Error::Error;
};

} // namespace distdiag
