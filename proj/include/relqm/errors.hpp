#pragma once

#include <stdexcept>
#include <string>

namespace relqm {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: a magnetic label incompatible with its spin, an unknown
/// particle label, a non-normalized amplitude vector, ...
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The requested quantity is outside the range where double precision results
/// can be trusted.
class AccuracyError : public Error {
 public:
  using Error::Error;
};

/// Hilbert-space dimension exceeds the exact-engine bound, or two operands
/// live on spaces of different size.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A density operator drifted outside the physical set (Hermiticity, trace,
/// positivity) beyond tolerance.
class StateError : public Error {
 public:
  using Error::Error;
};

/// Conditioning on an event whose probability is numerically zero.
class NullEventError : public Error {
 public:
  using Error::Error;
};

/// Strict-period time average requested on a Hamiltonian whose gaps are not
/// integer multiples of 2 pi / T.
class IncommensurateSpectrumError : public Error {
 public:
  using Error::Error;
};

}  // namespace relqm
