#pragma once

#include <stdexcept>
#include <string>

namespace eapo {

// Invalid configuration or precondition on caller-supplied parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input data (token ids, dataset lines).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mathematical domain violation (e.g. zero entropy in a ratio).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A reward component could not be produced. Never replaced by a default score.
class ScoringError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Snapshot, log or report file is missing, unreadable or has the wrong schema.
class ArtifactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite loss or gradient during training.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace eapo
