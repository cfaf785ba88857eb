#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace maxgraph {

enum class ErrorCode {
  invalid_config,
  not_spacelike,
  not_weakly_spacelike,
  invalid_parameter,
  invalid_problem,
  invalid_topology,
  resolution_exceeded,
  no_convergence,
  sampling_exhausted,
  resource,
  io,
  internal,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_config: return "InvalidConfig";
    case ErrorCode::not_spacelike: return "NotSpacelike";
    case ErrorCode::not_weakly_spacelike: return "NotWeaklySpacelike";
    case ErrorCode::invalid_parameter: return "InvalidParameter";
    case ErrorCode::invalid_problem: return "InvalidProblem";
    case ErrorCode::invalid_topology: return "InvalidTopology";
    case ErrorCode::resolution_exceeded: return "ResolutionExceeded";
    case ErrorCode::no_convergence: return "NoConvergence";
    case ErrorCode::sampling_exhausted: return "SamplingExhausted";
    case ErrorCode::resource: return "ResourceLimit";
    case ErrorCode::io: return "IOError";
    case ErrorCode::internal: return "InternalError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Domain errors are caused by the input data; everything else is a
  /// resource, convergence or internal failure.
  bool is_domain_error() const noexcept {
    switch (code_) {
      case ErrorCode::invalid_config:
      case ErrorCode::not_spacelike:
      case ErrorCode::not_weakly_spacelike:
      case ErrorCode::invalid_parameter:
      case ErrorCode::invalid_problem:
      case ErrorCode::invalid_topology:
      case ErrorCode::io:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorCode code_;
};

/// Raised when a pair of singular points violates the spacelike condition,
/// or when a field has |grad u| >= 1 on some triangle.
class NotSpacelikeError : public Error {
 public:
  NotSpacelikeError(int first, int second, const std::string& what)
      : Error(ErrorCode::not_spacelike, what), first_(first), second_(second) {}

  static NotSpacelikeError on_triangle(int triangle, const std::string& what) {
    NotSpacelikeError e(-1, -1, what);
    e.triangle_ = triangle;
    return e;
  }

  int first() const noexcept { return first_; }
  int second() const noexcept { return second_; }
  int triangle() const noexcept { return triangle_; }

 private:
  int first_;
  int second_;
  int triangle_ = -1;
};

class NoConvergenceError : public Error {
 public:
  NoConvergenceError(double residual, int level, const std::string& what)
      : Error(ErrorCode::no_convergence, what), residual_(residual), level_(level) {}

  double residual() const noexcept { return residual_; }
  int level() const noexcept { return level_; }

 private:
  double residual_;
  int level_;
};

}  // namespace maxgraph
