#pragma once

#include <stdexcept>
#include <string>

namespace ccuc {

/// Bad input data: malformed files, violated invariants, out-of-range arguments.
class InputError : public std::invalid_argument {
public:
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical routine failed in a way that valid input should never produce.
class InternalError : public std::runtime_error {
public:
    explicit InternalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ccuc
