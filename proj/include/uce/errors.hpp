#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace uce {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (dims, ranges, duplicate names...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Stream read/write failure.
class IoError : public Error {
public:
    IoError(const std::string& what, std::uint64_t byte_offset);
    std::uint64_t byte_offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

/// Not a file of the expected kind (bad magic, unknown dtype).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Right kind of file, inconsistent contents (truncated, trailing bytes, overflow).
class CorruptFileError : public Error {
public:
    using Error::Error;
};

/// The Gram matrix could not be factorized even after the jitter retry.
class SingularMatrixError : public Error {
public:
    SingularMatrixError(const std::string& what, double smallest_pivot);
    double smallest_pivot() const noexcept { return pivot_; }

private:
    double pivot_;
};

/// The gradient-descent reference kept increasing the objective.
class DivergenceError : public Error {
public:
    using Error::Error;
};

} // namespace uce
