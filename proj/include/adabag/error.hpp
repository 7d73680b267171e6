#pragma once

#include <stdexcept>
#include <string>

namespace adabag {

enum class ErrorKind { config, data, numeric, io, invalid_argument };

// All library failures are reported through this type; the C API maps
// `kind()` onto its status codes.
class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind)
    {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
{
    throw Error(kind, what);
}

} // namespace adabag
