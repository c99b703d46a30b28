#pragma once

#include <stdexcept>
#include <string>

namespace archive_lens {

// Caller handed us something outside an operation's domain.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Configuration is inconsistent with the data, e.g. an unknown detector id.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Something that should not happen on valid input (solver non-convergence).
class InternalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace archive_lens
