#pragma once

#include <stdexcept>
#include <string>

namespace igprune {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape or dimension disagreement between tensors, layers, batches or masks.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A layer, neuron, weight or label index out of range.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Malformed on-disk data (checkpoints, IDX files).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Invalid user configuration or argument.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A pruning budget that cannot be met or is inconsistent.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values produced during optimization.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace igprune
