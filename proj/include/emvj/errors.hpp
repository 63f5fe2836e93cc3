#pragma once

#include <stdexcept>
#include <string>

namespace emvj {

/// Raised when a parameter set violates a documented invariant.
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised by loaders on malformed or inconsistent input data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what)
{
    if (!ok) throw InvalidParameter(what);
}

} // namespace detail
} // namespace emvj
