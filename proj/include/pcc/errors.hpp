#pragma once

#include <stdexcept>
#include <string>

namespace pcc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input content that cannot be interpreted.
class ParseError : public Error {
 public:
  using Error::Error;
};

class MalformedRecord : public ParseError {
 public:
  MalformedRecord(int line, const std::string& what)
      : ParseError("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class NoBackbone : public ParseError {
 public:
  using ParseError::ParseError;
};

class LengthMismatch : public ParseError {
 public:
  using ParseError::ParseError;
};

class UnknownSymbol : public ParseError {
 public:
  using ParseError::ParseError;
};

// Inputs that parse but violate a contract of the requested computation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class MissingAtom : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class TooFewNodes : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SameRank : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class OddDim : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ZeroSpectrum : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateCell : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class CoincidentPoints : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateCloud : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ZeroCom : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IsolatedNode : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ShapeMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class BadConfig : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class MissingProteinChannel : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Serialized artifacts that cannot be trusted.
class BlobError : public Error {
 public:
  using Error::Error;
};

class CorruptBlob : public BlobError {
 public:
  using BlobError::BlobError;
};

class VersionMismatch : public BlobError {
 public:
  using BlobError::BlobError;
};

class FileUnreadable : public Error {
 public:
  using Error::Error;
};

}  // namespace pcc
