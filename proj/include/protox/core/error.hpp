#pragma once

#include <stdexcept>
#include <string>

namespace protox {

// Error taxonomy shared by the library and the CLI. The category decides
// the process exit code: config -> 2, dependency -> 3, numeric -> 4,
// everything else -> 1.
enum class ErrorCategory {
  config,
  shape,
  state,
  format,
  numeric,
  index,
  data,
  split,
  dependency,
  evaluation,
  io,
};

inline const char* to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::config: return "config";
    case ErrorCategory::shape: return "shape";
    case ErrorCategory::state: return "state";
    case ErrorCategory::format: return "format";
    case ErrorCategory::numeric: return "numeric";
    case ErrorCategory::index: return "index";
    case ErrorCategory::data: return "data";
    case ErrorCategory::split: return "split";
    case ErrorCategory::dependency: return "dependency";
    case ErrorCategory::evaluation: return "evaluation";
    case ErrorCategory::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(std::string(to_string(category)) + " error: " + message),
        category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

  int exit_code() const noexcept {
    switch (category_) {
      case ErrorCategory::config: return 2;
      case ErrorCategory::dependency: return 3;
      case ErrorCategory::numeric: return 4;
      default: return 1;
    }
  }

 private:
  ErrorCategory category_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error(ErrorCategory::config, m) {}
};
struct ShapeError : Error {
  explicit ShapeError(const std::string& m) : Error(ErrorCategory::shape, m) {}
};
struct StateError : Error {
  explicit StateError(const std::string& m) : Error(ErrorCategory::state, m) {}
};
struct FormatError : Error {
  explicit FormatError(const std::string& m) : Error(ErrorCategory::format, m) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& m) : Error(ErrorCategory::numeric, m) {}
};
struct IndexError : Error {
  explicit IndexError(const std::string& m) : Error(ErrorCategory::index, m) {}
};
struct DataError : Error {
  explicit DataError(const std::string& m) : Error(ErrorCategory::data, m) {}
};
struct SplitError : Error {
  explicit SplitError(const std::string& m) : Error(ErrorCategory::split, m) {}
};
struct DependencyError : Error {
  explicit DependencyError(const std::string& m) : Error(ErrorCategory::dependency, m) {}
};
struct EvalError : Error {
  explicit EvalError(const std::string& m) : Error(ErrorCategory::evaluation, m) {}
};
struct IoError : Error {
  explicit IoError(const std::string& m) : Error(ErrorCategory::io, m) {}
};

}  // namespace protox
