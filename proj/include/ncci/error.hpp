#pragma once

#include <stdexcept>
#include <string>

namespace ncci {

// Every failure the library reports derives from Error. The CLI maps the
// concrete type onto its exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad values or malformed files supplied by the caller.
class InputError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A referenced input file does not exist or cannot be opened.
class MissingInputError : public Error {
 public:
  MissingInputError(const std::string& what, std::string path);
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Sentence-probability provider failures: unreachable service, text absent
// from a score file, malformed responses.
class ProviderError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace ncci
