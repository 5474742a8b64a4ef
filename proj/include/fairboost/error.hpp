#ifndef FAIRBOOST_ERROR_HPP_
#define FAIRBOOST_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fairboost {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied hyperparameter or option is out of its valid range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Violated precondition on argument shapes (length mismatches, empty inputs).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Schema file is malformed or does not match the CSV header.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A CSV cell could not be turned into a valid value.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A constructed dataset breaks one of its invariants (e.g. a single group).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A raw benchmark file is missing or fails its recorded checksum.
class IngestionError : public Error {
 public:
  using Error::Error;
};

/// Leaf with hess_sum + lambda <= 0; only reachable with mu = 1 and lambda = 0.
class DegenerateLeafError : public Error {
 public:
  using Error::Error;
};

/// Base for problems with a model file or an in-memory tree structure.
class ModelError : public Error {
 public:
  using Error::Error;
};

class VersionError : public ModelError {
 public:
  using ModelError::ModelError;
};

class ParseError : public ModelError {
 public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : ModelError(what + " (at byte offset " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}

  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

class MalformedNodeError : public ModelError {
 public:
  using ModelError::ModelError;
};

class DanglingReferenceError : public ModelError {
 public:
  using ModelError::ModelError;
};

}  // namespace fairboost

#endif  // FAIRBOOST_ERROR_HPP_
