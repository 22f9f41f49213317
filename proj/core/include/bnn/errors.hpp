#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bnn {

// Caller passed something outside an operation's contract.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ShapeError : public ArgumentError {
public:
    using ArgumentError::ArgumentError;
};

// Malformed or truncated input file. `offset` is the byte position where
// decoding stopped.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// Non-finite loss, runaway rejection in a sampler, and similar failures.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace bnn
