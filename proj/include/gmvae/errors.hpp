#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gmvae {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Static shape disagreement between operands (matmul inner dims, head widths, ...).
struct ShapeError : Error {
  using Error::Error;
};

// Non-finite value produced during evaluation, or non-finite gradient fed to
// the optimizer. The message names the offending node or term.
struct NumericalError : Error {
  using Error::Error;
};

// Invalid configuration value (zero layer width, K = 0, bad mode string, ...).
struct ConfigError : Error {
  using Error::Error;
};

// Argument outside the mathematical domain of an operation (nonpositive
// variance, posterior rows that do not normalize, ...).
struct DomainError : Error {
  using Error::Error;
};

// Out-of-range component or element index.
struct IndexError : Error {
  using Error::Error;
};

// File-format errors carry the byte offset at which parsing failed.
struct DataFormatError : Error {
  std::size_t offset;
  DataFormatError(const std::string& msg, std::size_t off)
      : Error(msg + " (offset " + std::to_string(off) + ")"), offset(off) {}
};

struct BadMagic : DataFormatError {
  using DataFormatError::DataFormatError;
};

struct DimensionMismatch : DataFormatError {
  using DataFormatError::DataFormatError;
};

struct TruncatedFile : DataFormatError {
  using DataFormatError::DataFormatError;
};

}  // namespace gmvae
