#pragma once

#include <stdexcept>
#include <string>

namespace qconv {

enum class ErrorKind {
    InvalidArgument,
    LayoutMismatch,
    TypeMismatch,
    ShapeMismatch,
    InvalidSpec,
    UnsupportedOp,
    NotApplicable,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
    throw Error(kind, msg);
}

} // namespace qconv
