#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dihedral {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset()` is the byte offset of the offending token.
class ParseError : public Error {
public:
    enum class Kind { syntax, unknown_identifier, arity };

    ParseError(Kind kind, std::size_t offset, const std::string& what)
        : Error(what + " at offset " + std::to_string(offset)), kind_(kind), offset_(offset)
    {
    }

    Kind kind() const noexcept { return kind_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    Kind kind_;
    std::size_t offset_;
};

/// A function was evaluated outside its domain (log of a non-positive number etc).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid arguments or scene data.
class InputError : public Error {
public:
    using Error::Error;
};

/// A geometric precondition failed: degenerate metric, point off a face, degenerate corner.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// An iterative numerical routine failed to converge.
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace dihedral
