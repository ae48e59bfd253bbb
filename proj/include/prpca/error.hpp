#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace prpca {

enum class Errc {
  InvalidMatrix,
  NumericalFailure,
  InvalidParameter,
  InvalidProjectorPair,
  UnsupportedDimension,
  ShapeError,
  NotIdentifiable,
  BoundNotApplicable,
  FormatError,
};

inline const char* to_string(Errc c) {
  switch (c) {
    case Errc::InvalidMatrix: return "InvalidMatrix";
    case Errc::NumericalFailure: return "NumericalFailure";
    case Errc::InvalidParameter: return "InvalidParameter";
    case Errc::InvalidProjectorPair: return "InvalidProjectorPair";
    case Errc::UnsupportedDimension: return "UnsupportedDimension";
    case Errc::ShapeError: return "ShapeError";
    case Errc::NotIdentifiable: return "NotIdentifiable";
    case Errc::BoundNotApplicable: return "BoundNotApplicable";
    case Errc::FormatError: return "FormatError";
  }
  return "Error";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(to_string(code)) + ": " + msg), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Raised by parsers; offset is the byte position where parsing stopped.
class FormatError : public Error {
 public:
  FormatError(std::size_t offset, const std::string& msg)
      : Error(Errc::FormatError, msg + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// A solve that produced a non-finite iterate. Carries the objective trace up to the failure.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& msg, std::vector<double> trace)
      : Error(Errc::NumericalFailure, msg), trace_(std::move(trace)) {}

  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

namespace detail {

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool ok, Errc code, const std::string& msg) {
  if (!ok) fail(code, msg);
}

}  // namespace detail

}  // namespace prpca
