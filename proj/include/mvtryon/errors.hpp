#pragma once

#include <stdexcept>
#include <string>

namespace mvt {

// Shape or rank mismatch between operands.
class DimensionError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

// A documented precondition was violated by the caller.
class ContractError : public std::logic_error {
   public:
    using std::logic_error::logic_error;
};

// Malformed file or record on disk.
class FormatError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

// Hard-selection could not decide (an arm is fully missing).
class SelectionError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

class SingularityError : public std::domain_error {
   public:
    using std::domain_error::domain_error;
};

// A loss or metric became NaN or infinite.
class NumericError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

// Bad command-line usage; maps to exit code 2.
class UsageError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace mvt
