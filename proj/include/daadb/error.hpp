#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace daadb {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed corpus row; line numbers are 1-based.
class ParseError : public Error {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& what)
        : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Binary artifact (EMB1, DAADB1) does not decode.
class FormatError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

// Non-finite loss or parameter during optimisation.
class TrainingError : public Error {
public:
    using Error::Error;
};

// Caller broke an operation's precondition.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace daadb
