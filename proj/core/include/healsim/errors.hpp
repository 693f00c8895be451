#pragma once

#include <stdexcept>
#include <string>

namespace healsim {

/// Invalid or inconsistent experiment/operation configuration.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Dimension or spec mismatch between models, datasets, or shards.
struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file; message carries row/column where known.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// An operation was called with inputs its contract forbids.
struct PreconditionError : std::runtime_error {
  explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

/// A numeric operation produced NaN or infinity.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace healsim
