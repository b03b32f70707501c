#pragma once

#include <stdexcept>
#include <string>

namespace riskbandit {

// Malformed input: unreadable files, bad config keys, unparsable numbers.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input is well-formed but outside an operation's domain (bad level, no
// oracle, bound not applicable, ...).
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace riskbandit
