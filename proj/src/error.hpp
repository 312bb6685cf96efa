#pragma once

#include <stdexcept>
#include <string>

namespace rpmkit {

enum class Errc {
    invalid_argument = 1,
    io = 2,
    format = 3,
    state = 4,
    unsatisfiable = 5,
    internal = 6,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) {
    throw Error(code, what);
}

} // namespace rpmkit
