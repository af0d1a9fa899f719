#pragma once

#include <stdexcept>
#include <string>

namespace epps {

/// Malformed or unusable input data (bad tick records, mismatched day lengths, ...).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure failed to produce a trustworthy answer.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace epps
