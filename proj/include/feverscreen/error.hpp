#pragma once

#include <stdexcept>
#include <string>

namespace feverscreen {

// Failure caused by caller input: bad arguments, malformed files, short data.
// The CLI maps this type to exit code 2; any other exception is an internal
// bug and maps to exit code 1.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace feverscreen
