#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace subrayleigh {

/// Base of every error the library throws. The category decides the CLI exit code.
class Error : public std::runtime_error {
public:
    enum class Category { validation, io };

    Error(const std::string& what, Category category = Category::validation)
        : std::runtime_error(what), category_(category) {}

    Category category() const noexcept { return category_; }

private:
    Category category_;
};

/// Non-finite or otherwise inadmissible argument.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Argument outside the documented interval.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Iterative solve failed to reach its target.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Physical regime assumption violated (e.g. the focused-spot condition).
class RegimeError : public Error {
public:
    using Error::Error;
};

/// Grid too coarse to resolve a kernel.
class ResolutionError : public Error {
public:
    ResolutionError(const std::string& what, std::size_t required_resolution)
        : Error(what), required_resolution_(required_resolution) {}

    std::size_t required_resolution() const noexcept { return required_resolution_; }

private:
    std::size_t required_resolution_;
};

/// Problem size exceeds a cost guard.
class SizeError : public Error {
public:
    using Error::Error;
};

/// Image geometry does not support the requested measurement.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Pixel data unusable (NaN, negative, all zero).
class DataError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what, Category::io) {}
};

/// Malformed file contents; carries the byte offset where parsing stopped.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte " + std::to_string(offset) + ")", Category::io), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

}  // namespace subrayleigh
