#pragma once

#include <stdexcept>
#include <string>

namespace riesz2w {

/// Failure categories. The CLI maps `kind()` to a stable error code and
/// uses exit status 1 for every category except `anomaly` (status 2).
enum class ErrorKind {
  input,
  dimension_mismatch,
  singularity,
  empty_cube,
  convergence,
  range,
  admissibility,
  configuration,
  precondition,
  coverage,
  resource,
  unsupported_codimension,
  undefined_sup,
  invalid_partition,
  anomaly,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::input: return "input";
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::singularity: return "singularity";
    case ErrorKind::empty_cube: return "empty_cube";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::range: return "range";
    case ErrorKind::admissibility: return "admissibility";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::coverage: return "coverage";
    case ErrorKind::resource: return "resource";
    case ErrorKind::unsupported_codimension: return "unsupported_codimension";
    case ErrorKind::undefined_sup: return "undefined_sup";
    case ErrorKind::invalid_partition: return "invalid_partition";
    case ErrorKind::anomaly: return "anomaly";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const char* what) {
  if (!cond) [[unlikely]] fail(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) [[unlikely]] fail(kind, what);
}

}  // namespace riesz2w
