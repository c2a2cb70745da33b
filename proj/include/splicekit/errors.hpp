#ifndef SPLICEKIT_ERRORS_HPP_
#define SPLICEKIT_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace splicekit {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Contradictory constraints found while merging (empty version intersection,
// disagreeing variant values, mismatched os/target).
struct ConflictError : Error {
  using Error::Error;
};

struct ParseError : Error {
  ParseError(std::string msg, std::size_t position, std::vector<std::string> expected_tokens)
      : Error(std::move(msg)), position(position), expected(std::move(expected_tokens)) {}

  std::size_t position;
  std::vector<std::string> expected;
};

struct CycleDetectedError : Error {
  using Error::Error;
};

struct SpecValidationError : Error {
  using Error::Error;
};

struct RepoFormatError : Error {
  using Error::Error;
};

struct RepoValidationError : Error {
  using Error::Error;
};

struct UnknownPackageError : Error {
  using Error::Error;
};

struct UnsatisfiableError : Error {
  UnsatisfiableError(std::string msg, std::vector<std::string> core)
      : Error(std::move(msg)), core(std::move(core)) {}

  // Best-effort conflict core: the constraint set on the deepest failing branch.
  std::vector<std::string> core;
};

struct InstanceTooLargeError : Error {
  using Error::Error;
};

struct NoTargetError : Error {
  using Error::Error;
};

struct AmbiguousTargetError : Error {
  using Error::Error;
};

struct WouldCycleError : Error {
  using Error::Error;
};

struct MissingProvenanceError : Error {
  using Error::Error;
};

struct HashMismatchError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

struct MissingDependencyError : Error {
  using Error::Error;
};

struct PrefixTooLongError : Error {
  using Error::Error;
};

}  // namespace splicekit

#endif
