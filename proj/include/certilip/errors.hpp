#pragma once

#include <stdexcept>
#include <string>

namespace certilip {

enum class ErrorCode {
    invalid_argument,
    dimension_mismatch,
    io,
    parse,
    numeric,
    unsupported,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void throw_invalid(const std::string& msg) {
    throw Error(ErrorCode::invalid_argument, msg);
}

[[noreturn]] inline void throw_dimension(const std::string& msg) {
    throw Error(ErrorCode::dimension_mismatch, msg);
}

[[noreturn]] inline void throw_io(const std::string& msg) {
    throw Error(ErrorCode::io, msg);
}

[[noreturn]] inline void throw_parse(const std::string& msg) {
    throw Error(ErrorCode::parse, msg);
}

[[noreturn]] inline void throw_numeric(const std::string& msg) {
    throw Error(ErrorCode::numeric, msg);
}

} // namespace certilip
