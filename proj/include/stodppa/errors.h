#ifndef STODPPA_ERRORS_H_
#define STODPPA_ERRORS_H_

#include <stdexcept>
#include <string>

namespace stodppa {

// Violated precondition: bad shape, out-of-range index, invalid argument.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. The message carries file and line context.
class ParseError : public IoError {
 public:
  using IoError::IoError;
};

// A recommendation was requested for a user with neither a cached encoding
// nor any history to encode.
class ColdStartError : public ContractError {
 public:
  using ContractError::ContractError;
};

}  // namespace stodppa

#endif  // STODPPA_ERRORS_H_
