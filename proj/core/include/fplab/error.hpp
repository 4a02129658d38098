#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fplab {

// Bad shapes, out-of-range arguments, violated preconditions.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// |w| below the floor at which the tanh-unit transform is defined.
class SingularWeightError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Evaluation outside the domain of a formula (e.g. k = 0 for the tanh-unit transform).
class DomainError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class UnsupportedArchitecture : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// |1 - C1(k1)| at or below the configured phase floor.
class DegeneratePhaseError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Inconsistent or malformed experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. Carries the byte offset at which parsing failed.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Missing or unreadable data file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fplab
