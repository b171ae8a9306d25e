#pragma once

#include <stdexcept>
#include <string>

namespace iprov {

enum class Errc {
    SelfLoop,
    InconsistentJournal,
    ParseError,
    DuplicateId,
    BadMagic,
    Truncated,
    TooSmall,
    IdenticalInputs,
    UnknownImage,
    UnknownOp,
    DimMismatch,
    Io,
    Usage,
};

const char* to_string(Errc c);

/// Single exception type for the whole library; tests dispatch on code().
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& msg)
        : std::runtime_error(std::string(to_string(code)) + ": " + msg), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& msg) {
    throw Error(code, msg);
}

} // namespace iprov
