#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fsreach {

enum class ErrorCode {
    InvalidInput,
    LatticeMismatch,
    EmptySupport,
    DomainOverflow,
    InvalidGeometry,
    TooLarge,
    BadBigM,
    ParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised by the dense baseline when probability mass leaves its fixed domain.
class DomainOverflowError : public Error {
public:
    DomainOverflowError(double escaped_mass, int step)
        : Error(ErrorCode::DomainOverflow,
                "mass " + std::to_string(escaped_mass) + " left the domain at step " +
                    std::to_string(step)),
          escaped_mass_(escaped_mass), step_(step) {}

    [[nodiscard]] double escaped_mass() const noexcept { return escaped_mass_; }
    [[nodiscard]] int step() const noexcept { return step_; }

private:
    double escaped_mass_;
    int step_;
};

/// Schema violation while reading a JSON document; `pointer` locates the field.
class ParseError : public Error {
public:
    ParseError(std::string pointer, const std::string& message)
        : Error(ErrorCode::ParseError, pointer + ": " + message), pointer_(std::move(pointer)) {}

    [[nodiscard]] const std::string& pointer() const noexcept { return pointer_; }

private:
    std::string pointer_;
};

}  // namespace fsreach
