#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace errmax {

enum class ErrorKind {
    InvalidSpec,
    Shape,
    Contract,
    Domain,
    TrainingDiverged,
    KnockedOut,
    SamplingStarvation,
    Labeling,
    IncompatibleSets,
    Parse,
    GradientProbe,
    Ascent,
    EmptyInput,
    Io,
    ManifestValidation,
};

std::string_view to_string(ErrorKind kind);

/// Base exception for every failure raised by the library. The kind is
/// stable and is what callers (and the CLI's exit-code mapping) dispatch on.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);
    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class TrainingDivergedError : public Error {
public:
    TrainingDivergedError(int epoch, const std::string& what);
    [[nodiscard]] int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

class LabelingError : public Error {
public:
    LabelingError(std::size_t index, const std::string& what);
    [[nodiscard]] std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what);
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class GradientProbeError : public Error {
public:
    GradientProbeError(std::size_t coordinate, const std::string& what);
    [[nodiscard]] std::size_t coordinate() const noexcept { return coordinate_; }

private:
    std::size_t coordinate_;
};

/// Raised when an ascent cannot continue; carries the iterate it stopped at.
class AscentError : public Error {
public:
    AscentError(std::string iterate, const std::string& what);
    [[nodiscard]] const std::string& iterate() const noexcept { return iterate_; }

private:
    std::string iterate_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool cond, ErrorKind kind, const std::string& what) {
    if (!cond) fail(kind, what);
}

}  // namespace errmax
