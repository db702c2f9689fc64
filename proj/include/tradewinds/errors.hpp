#pragma once

#include <stdexcept>

namespace tradewinds {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// model evaluation
struct AllZeroWeights : Error { using Error::Error; };
struct NoObservations : Error { using Error::Error; };
struct KindMismatch : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };

// statistics
struct ZeroVariance : Error { using Error::Error; };
struct RankDeficient : Error { using Error::Error; };
struct InsufficientData : Error { using Error::Error; };
struct DegenerateRange : Error { using Error::Error; };
struct EmptyDistribution : Error { using Error::Error; };

// calibration
struct NonCalibratable : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

// ingestion
struct SchemaError : Error { using Error::Error; };
struct JoinError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

}  // namespace tradewinds
