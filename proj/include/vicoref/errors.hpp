#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vicoref {

// Root of all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A mention index occurs in two clusters.
struct OverlapError : Error {
  using Error::Error;
};

// A value lies outside its documented domain (e.g. index not in 1..n_mentions).
struct RangeError : Error {
  using Error::Error;
};

// A document or cluster set violates a structural invariant.
struct InvariantError : Error {
  using Error::Error;
};

// Strict-mode annotation parse failures.
struct SacrParseError : Error {
  using Error::Error;
};
struct UnbalancedBraceError : SacrParseError {
  using SacrParseError::SacrParseError;
};
struct MalformedTagError : SacrParseError {
  using SacrParseError::SacrParseError;
};
struct UnterminatedAnnotationError : SacrParseError {
  using SacrParseError::SacrParseError;
};

struct EmptyDocumentError : Error {
  using Error::Error;
};
struct EmptyCorpusError : Error {
  using Error::Error;
};

struct BudgetExceededError : Error {
  std::size_t estimated_tokens;
  std::size_t budget;
  BudgetExceededError(std::size_t estimated, std::size_t limit)
      : Error("prompt estimate of " + std::to_string(estimated) +
              " tokens exceeds budget of " + std::to_string(limit)),
        estimated_tokens(estimated),
        budget(limit) {}
};

// Endpoint unreachable or request rejected after the retry policy is exhausted.
struct TransportError : Error {
  using Error::Error;
};

// Replay mode found no recorded exchange for a prompt.
struct CassetteMissError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace vicoref
