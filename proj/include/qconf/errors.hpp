#pragma once

#include <stdexcept>
#include <string>

namespace qconf {

enum class error_kind {
    domain,
    range,
    parse,
    validation,
    unsupported,
    argument,
    resonance,
    pole,
    spiral_collision,
    singular_direction,
    growth,
    bracketing,
    degenerate_parameter,
    direction,
    parameter,
    config,
};

const char* error_code(error_kind k);

// Exit code used by the command line front end for an error of this kind.
int exit_code_for(error_kind k);

class error : public std::runtime_error {
public:
    error(error_kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    error_kind kind() const { return kind_; }
    const char* code() const { return error_code(kind_); }

private:
    error_kind kind_;
};

[[noreturn]] inline void fail(error_kind kind, const std::string& what) { throw error(kind, what); }

}  // namespace qconf
