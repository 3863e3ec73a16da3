#pragma once

#include <stdexcept>
#include <string>

namespace esgpv {

// Invalid user input, data file contents, or precondition violation.
// The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Broken internal invariant. The CLI maps this to exit code 1.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// One-line warning to stderr, prefixed with "esgpv: warning:".
void warn(const std::string& message);

} // namespace esgpv
