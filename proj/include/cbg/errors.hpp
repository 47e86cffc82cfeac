#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cbg {

// Common base so the CLI can catch everything the library throws.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidInputError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SizeError : public Error {
 public:
  using Error::Error;
};

// Some (cluster, strategy) pair has no data instance; `missing` lists them.
class CoverageError : public Error {
 public:
  CoverageError(const std::string& what, std::vector<std::pair<int, int>> missing_pairs)
      : Error(what), missing(std::move(missing_pairs)) {}
  std::vector<std::pair<int, int>> missing;
};

// An equilibrium search exhausted its candidates without certifying any.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, double best_eps)
      : Error(what), best_epsilon(best_eps) {}
  double best_epsilon;
};

}  // namespace cbg
