#pragma once

#include <stdexcept>
#include <string>

namespace wiser {

// Validation failures derive from std::logic_error (invalid_argument,
// domain_error, out_of_range); file and stream failures are IoError.

class InvalidDistribution : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class CertMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace wiser
