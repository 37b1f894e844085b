#pragma once

#include <stdexcept>
#include <string>

namespace medner {

/// Root of the error taxonomy. Subclasses map onto CLI exit codes:
/// UsageError -> 1, DataError -> 2, GatewayError -> 3.
struct MednerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : MednerError {
  using MednerError::MednerError;
};

struct DataError : MednerError {
  using MednerError::MednerError;
};

struct GatewayError : MednerError {
  using MednerError::MednerError;
};

// corpus / sampling
struct InsufficientCorpus : DataError {
  using DataError::DataError;
};
struct TestLeakage : DataError {
  using DataError::DataError;
};
struct OverlappingSpans : DataError {
  using DataError::DataError;
};

// prompt building
struct BudgetUnsatisfiable : DataError {
  using DataError::DataError;
};

// embeddings
struct EmptyText : DataError {
  using DataError::DataError;
};
struct DimensionMismatch : DataError {
  using DataError::DataError;
};
struct ZeroVector : DataError {
  using DataError::DataError;
};

// evaluation
struct ZeroGold : DataError {
  using DataError::DataError;
};
struct EmptyMatchSet : DataError {
  using DataError::DataError;
};
struct MissingRuns : DataError {
  using DataError::DataError;
};

// gateway
struct CacheMiss : GatewayError {
  using GatewayError::GatewayError;
};
struct TransportFailure : GatewayError {
  using GatewayError::GatewayError;
};
struct TokenLimitExceeded : GatewayError {
  using GatewayError::GatewayError;
};
struct ProviderUnavailable : GatewayError {
  using GatewayError::GatewayError;
};
struct MissingCredentials : GatewayError {
  using GatewayError::GatewayError;
};

/// CLI exit code for an error: usage 1, data 2, gateway 3.
inline int exit_code_for(const MednerError& error) {
  if (dynamic_cast<const UsageError*>(&error) != nullptr) return 1;
  if (dynamic_cast<const GatewayError*>(&error) != nullptr) return 3;
  return 2;
}

}  // namespace medner
