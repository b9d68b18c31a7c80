#pragma once

#include <stdexcept>
#include <string>

namespace csplift {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Signature-compatibility and arity mismatches.
struct SignatureError : Error {
    using Error::Error;
};

struct CapacityError : Error {
    using Error::Error;
};

struct PreconditionError : Error {
    using Error::Error;
};

struct UnsupportedError : Error {
    using Error::Error;
};

struct OverflowError : Error {
    using Error::Error;
};

struct ParseError : Error {
    ParseError(std::string file, std::size_t line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what), file(std::move(file)), line(line) {}
    std::string file;
    std::size_t line;
};

} // namespace csplift
