#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace abductor {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Clause, meta-rule or fact text that does not match the grammar.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& message, std::size_t line, std::size_t column, std::string token)
        : Error(format(message, line, column, token)), line_(line), column_(column), token_(std::move(token)) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    const std::string& token() const noexcept { return token_; }

private:
    static std::string format(const std::string& message, std::size_t line, std::size_t column,
                              const std::string& token) {
        return "syntax error at " + std::to_string(line) + ":" + std::to_string(column) + " near '" + token +
               "': " + message;
    }

    std::size_t line_;
    std::size_t column_;
    std::string token_;
};

class NonGroundExample : public Error {
public:
    using Error::Error;
};

class UnboundPredicateVar : public Error {
public:
    using Error::Error;
};

class InvalidTask : public Error {
public:
    using Error::Error;
};

class OracleTooLarge : public Error {
public:
    using Error::Error;
};

class EmptyFactSet : public Error {
public:
    using Error::Error;
};

class FixtureExhausted : public Error {
public:
    using Error::Error;
};

class TransportError : public Error {
public:
    using Error::Error;
};

class MalformedResponse : public Error {
public:
    using Error::Error;
};

class UnsatisfiableRule : public Error {
public:
    using Error::Error;
};

} // namespace abductor
