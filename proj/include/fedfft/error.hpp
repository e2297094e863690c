#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fedfft {

enum class ErrorCode {
    EmptyUpdateSet,
    ShapeMismatch,
    MissingCoordinate,
    ExtraCoordinate,
    NonFinite,
    InvalidArgument,
    DegenerateSample,
    EmptyVector,
    EmptySample,
    TrimTooLarge,
    TooFewClients,
    SubsetTooLarge,
    ZeroNorm,
    UnknownClientId,
    Format,
};

const char* to_string(ErrorCode code);

// Every library failure surfaces as this exception; `code()` lets callers
// (mainly the CLI) map failures onto exit statuses without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class ShapeMismatchError : public Error {
public:
    ShapeMismatchError(std::size_t client_id, std::size_t layer_index, const std::string& what)
        : Error(ErrorCode::ShapeMismatch, what), client_id_(client_id), layer_index_(layer_index) {}

    std::size_t client_id() const noexcept { return client_id_; }
    std::size_t layer_index() const noexcept { return layer_index_; }

private:
    std::size_t client_id_;
    std::size_t layer_index_;
};

}  // namespace fedfft
