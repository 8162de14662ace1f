#pragma once

#include <stdexcept>
#include <string>

namespace timedeq {

// Base for every error raised by the library. The CLI maps these to exit
// code 2 and prints a single-line reason on stderr.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what) : Error("ValidationError", what) {}
};

struct BackendMismatch : Error {
  explicit BackendMismatch(const std::string& what) : Error("BackendMismatch", what) {}
};

struct BoundExceeded : Error {
  explicit BoundExceeded(const std::string& what) : Error("BoundExceeded", what) {}
};

struct UnsupportedExact : Error {
  explicit UnsupportedExact(const std::string& what) : Error("UnsupportedExact", what) {}
};

struct UnsupportedHom : Error {
  explicit UnsupportedHom(const std::string& what) : Error("UnsupportedHom", what) {}
};

struct UnknownDuration : Error {
  explicit UnknownDuration(const std::string& what) : Error("UnknownDuration", what) {}
};

struct EmptyConvexSet : Error {
  explicit EmptyConvexSet(const std::string& what) : Error("EmptyConvexSet", what) {}
};

struct NoAcceptance : Error {
  explicit NoAcceptance(const std::string& what) : Error("NoAcceptance", what) {}
};

struct BudgetError : Error {
  explicit BudgetError(const std::string& what) : Error("Budget", what) {}
};

}  // namespace timedeq
