#pragma once

#include <stdexcept>
#include <string>

namespace asmlens {

enum class ErrorKind {
    NotAnExecutable,
    NoDebugInfo,
    UnreadableFile,
    UnknownFile,
    UnknownAddress,
    UnknownFunction,
    UnknownBlock,
    UnknownView,
    UnknownSession,
    UnknownBinary,
    NoFurtherHighlight,
    EmptyWindow,
    BadRequest,
    MalformedDebugInfo,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace asmlens
