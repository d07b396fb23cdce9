#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qqr {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (dimensions, orders, ranges).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// An iterative kernel failed to converge or a factorization broke down.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// A Kronecker-sum system is singular: some sum of factor eigenvalues hits
/// the negated shift (or the assembled matrix has an exact zero pivot).
class SingularResonance : public NumericalFailure {
 public:
  SingularResonance(const std::string& what, double pivot)
      : NumericalFailure(what), pivot_(pivot) {}
  double pivot() const noexcept { return pivot_; }

 private:
  double pivot_;
};

/// Dense assembly would exceed the configured memory cap.
class SizeRefusal : public Error {
 public:
  SizeRefusal(const std::string& what, std::size_t predicted_bytes,
              std::size_t cap_bytes)
      : Error(what), predicted_bytes_(predicted_bytes), cap_bytes_(cap_bytes) {}
  std::size_t predicted_bytes() const noexcept { return predicted_bytes_; }
  std::size_t cap_bytes() const noexcept { return cap_bytes_; }

 private:
  std::size_t predicted_bytes_;
  std::size_t cap_bytes_;
};

/// Malformed system or coefficient file.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace qqr
