#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tado {

/// Base of every error raised by the library. `kind()` is a short stable
/// token used by the command-line front end for machine-parseable output.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept = 0;
};

class ShapeError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "shape"; }
};

/// A precondition of an operation was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "contract"; }
};

class EmptyCorpusError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "empty-corpus"; }
};

class SplitError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "split"; }
};

/// Malformed binary or JSON file. Carries the byte offset where decoding
/// stopped and, for record-oriented files, the index of the failing record.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset, std::int64_t record = -1)
      : Error(what + " (offset " + std::to_string(offset) +
              (record >= 0 ? ", record " + std::to_string(record) : std::string()) + ")"),
        offset_(offset),
        record_(record) {}

  const char* kind() const noexcept override { return "format"; }
  std::uint64_t offset() const noexcept { return offset_; }
  std::int64_t record() const noexcept { return record_; }

 private:
  std::uint64_t offset_;
  std::int64_t record_;
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io"; }
};

}  // namespace tado
