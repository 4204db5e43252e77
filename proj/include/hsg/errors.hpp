#pragma once

#include <stdexcept>
#include <string>

namespace hsg {

/// Parameter outside the support of a distribution or function.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Caller violated an operation precondition (shape mismatch, too-short series, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid scan/model/run configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Factorization or other numerical step failed even after regularization.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A rejection sampler exceeded its trial cap.
class RejectionCapError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Operation has no closed form for the requested configuration.
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <class E>
inline void require(bool ok, const std::string& what) {
  if (!ok) throw E(what);
}

}  // namespace detail
}  // namespace hsg
